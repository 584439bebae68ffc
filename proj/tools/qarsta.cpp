#include "qarsta/cli.hpp"

int main(int argc, char** argv) { return qarsta::cli::dispatch(argc, argv); }
