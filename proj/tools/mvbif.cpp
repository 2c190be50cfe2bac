#include "mvbif/cli_io.hpp"

extern char** environ;

int main(int argc, char** argv) { return mvbif::cli_main(argc, argv, environ); }
