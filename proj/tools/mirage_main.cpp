#include "mirage/cli/cli.hpp"

int main(int argc, char** argv) { return mirage::cli::parse_and_dispatch(argc, argv); }
