#include "obcs/cli.hpp"

int main(int argc, char** argv) { return obcs::cli::run(argc, argv); }
