#include "cpts/cli.hpp"

int main(int argc, char** argv) { return cpts::cli::run(argc, argv); }
