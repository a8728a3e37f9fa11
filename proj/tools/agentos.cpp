#include "agentos/cli.hpp"

int main(int argc, char** argv) { return agentos::run_cli(argc, argv); }
