#include "commands.hpp"

int main(int argc, char** argv) { return sqavg::cli::run_cli(argc, argv); }
