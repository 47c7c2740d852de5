#include "rnfilter/cli.hpp"

int main(int argc, char** argv) { return rnf::cli_main(argc, argv); }
