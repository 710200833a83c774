#include "cimbi/cli.hpp"

int main(int argc, char** argv) { return cimbi::cli::run_cli(argc, argv); }
