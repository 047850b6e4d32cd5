#include "hess/cli.hpp"

int main(int argc, char** argv) { return hess::run_cli(argc, argv); }
