#include "cellcast/cli/commands.hpp"

int main(int argc, char** argv) { return cellcast::cli::run_cli(argc, argv); }
