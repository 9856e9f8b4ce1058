#include "she/cli.hpp"

int main(int argc, char** argv) { return she::run_cli(argc, argv); }
