#include "chernlab/cli/cli.hpp"

int main(int argc, char** argv) { return chernlab::cli::run_cli(argc, argv); }
