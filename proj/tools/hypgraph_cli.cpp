#include "hypgraph/cli.hpp"

int main(int argc, char** argv) { return hypgraph::cli_main(argc, argv); }
