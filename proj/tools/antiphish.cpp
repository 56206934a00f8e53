#include "antiphish/cli.hpp"

int main(int argc, char** argv) { return antiphish::cli::run(argc, argv); }
