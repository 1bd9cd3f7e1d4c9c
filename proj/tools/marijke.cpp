#include "marijke/cli.hpp"

int main(int argc, char** argv) { return marijke::run_cli({argv + 1, argv + argc}); }
