#include "corrspec/cli.hpp"

int main(int argc, char** argv) { return corrspec::cli::run(argc, argv); }
