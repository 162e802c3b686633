#include "sclab/cli_io.hpp"

int main(int argc, char** argv) { return sclab::run_cli(argc, argv); }
