#include "cli.hpp"
int main(int argc, char** argv) { return hypermerw::cli::run(argc, argv); }
