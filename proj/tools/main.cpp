#include "cli.hpp"

int main(int argc, char** argv) { return thermoflow::cli::main(argc, argv); }
