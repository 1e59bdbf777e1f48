#include "aeromon/cli.hpp"

int main(int argc, char** argv) { return aeromon::cli::run(argc, argv); }
