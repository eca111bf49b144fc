#include "cldmd/cli.hpp"

int main(int argc, char** argv) { return cldmd::cli::run_main(argc, argv); }
