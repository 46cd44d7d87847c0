#include "culr/cli.hpp"

int main(int argc, char** argv) { return culr::cli::run(argc, argv); }
