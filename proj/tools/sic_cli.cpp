#include "sic/cli.hpp"

int main(int argc, char** argv) { return sic::cli_dispatch(argc, argv); }
