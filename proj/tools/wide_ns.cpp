#include "wide/commands.hpp"

int main(int argc, char** argv) { return wide::run_cli(argc, argv); }
