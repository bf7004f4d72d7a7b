#include "cli.hpp"

int main(int argc, char** argv) { return nlcl::run_cli(argc, argv); }
