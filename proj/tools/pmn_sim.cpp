#include "pmn/cli.hpp"

int main(int argc, char** argv) { return pmn::run_cli(argc, argv); }
