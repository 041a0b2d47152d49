#include "coachsim/cli.hpp"

int main(int argc, char** argv) { return coachsim::cli::run_cli(argc, argv); }
