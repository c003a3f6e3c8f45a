#include "hypersumm/cli.hpp"

int main(int argc, char** argv) { return hypersumm::cli::run(argc, argv); }
