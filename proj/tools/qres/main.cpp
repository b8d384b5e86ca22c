#include "qres/commands.hpp"

int main(int argc, char** argv) { return qres::cli::run_cli(argc, argv); }
