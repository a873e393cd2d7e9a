#include "kspacings/cli.hpp"

int main(int argc, char** argv) { return kspacings::cli_main(argc, argv); }
