#include "cli.hpp"

int main(int argc, char** argv) { return pivotlab::cli_main(argc, argv); }
