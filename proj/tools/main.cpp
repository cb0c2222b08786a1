#include "assaygen/cli.hpp"

int main(int argc, char** argv) { return assaygen::cli::run_cli(argc, argv); }
