#include "cli.hpp"

int main(int argc, char** argv) { return randghep::cli::run(argc, argv); }
