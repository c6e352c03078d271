#include "lamcoal/cli.hpp"

int main(int argc, char** argv) { return lamcoal::run_cli(argc, argv); }
