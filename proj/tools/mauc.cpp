#include "mauc/cli.hpp"

int main(int argc, char** argv) { return mauc::run_cli(argc, argv); }
