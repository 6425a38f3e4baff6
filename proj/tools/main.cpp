#include "tomocg/cli.hpp"

int main(int argc, char** argv) { return tomocg::cli::cli_main(argc, argv); }
