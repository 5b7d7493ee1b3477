#include "pbsv/cli.hpp"

int main(int argc, char** argv) { return pbsv::cli::run(argc, argv); }
