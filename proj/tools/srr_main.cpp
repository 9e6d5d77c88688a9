#include "srr/cli.hpp"

int main(int argc, char** argv) { return srr::cli::run(argc, argv); }
