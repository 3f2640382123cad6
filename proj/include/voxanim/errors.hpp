#pragma once

#include <stdexcept>
#include <string>

namespace voxanim {

/// Filesystem / stream failures (missing file, short write, ...).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed external input (binvox, scene JSON, .svo streams, CSV).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated preconditions or domain invariants (bad arguments, bad scene
/// semantics, dimension mismatches).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure classes of the .svo binary reader. Each corrupted-input class maps
/// to its own code so callers (and tests) can tell them apart.
enum class SvoFormatErrorCode {
    BadMagic,
    BadVersion,
    BadHeader,
    Truncated,
    TrailingData,
    NodeIndexOutOfRange,
    AttrIndexOutOfRange,
};

class SvoFormatError : public ParseError {
public:
    SvoFormatError(SvoFormatErrorCode code, const std::string& msg)
        : ParseError(msg), code_(code) {}

    SvoFormatErrorCode code() const { return code_; }

private:
    SvoFormatErrorCode code_;
};

} // namespace voxanim
