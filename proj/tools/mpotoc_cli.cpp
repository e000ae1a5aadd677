#include "run_config.hpp"

int main(int argc, char **argv) { return mpotoc::cli::main_entry(argc, argv); }
