#include "semvec/cli.hpp"

int main(int argc, char** argv) { return semvec::cli_main(argc, argv); }
