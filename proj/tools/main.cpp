#include "mixkin/cli.hpp"

int main(int argc, char** argv) { return mixkin::run_cli(argc, argv); }
