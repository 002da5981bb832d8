#include "flb/cli.hpp"

int main(int argc, char** argv) { return flb::run_cli(argc, argv); }
