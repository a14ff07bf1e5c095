#include "loxolab/cli.hpp"

int main(int argc, char** argv) { return loxolab::cli_main(argc, argv); }
