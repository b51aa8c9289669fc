#include "cli.hpp"

int main(int argc, char** argv) { return hftp::cli::run(argc, argv); }
