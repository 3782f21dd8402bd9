#include "pncoder/cli.hpp"

int main(int argc, char **argv) { return pncoder::run_cli(argc, argv); }
