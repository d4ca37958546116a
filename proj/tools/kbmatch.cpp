#include "kbmatch/cli.hpp"

int main(int argc, char** argv) { return kbmatch::run_cli(argc, argv); }
