#include "crop/cli.hpp"

int main(int argc, char** argv) { return crop::cli::main(argc, argv); }
