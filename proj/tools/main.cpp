#include "fairgi/cli.hpp"

int main(int argc, char** argv) { return fairgi::cli_main(argc, argv); }
