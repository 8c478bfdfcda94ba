#include "curvlab/cli.hpp"

int main(int argc, char** argv) { return curvlab::cli::main_entry(argc, argv); }
