#include "cli.hpp"

int main(int argc, char** argv) { return twofluid::cli::run_cli(argc, argv); }
