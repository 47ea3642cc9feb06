#include "ams/cli.hpp"

int main(int argc, char** argv) { return ams::cli::dispatch(argc, argv); }
