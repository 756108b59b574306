#include "embrec/cli.hpp"

int main(int argc, char** argv) { return embrec::run_cli(argc, argv); }
