#include "cli.hpp"

int main(int argc, char** argv) { return sas::cli::cli_main(argc, argv); }
