#include "voxanim/cli.hpp"

int main(int argc, char** argv) { return voxanim::cli::run_main(argc, argv); }
