#include "jslu/cli.hpp"

int main(int argc, char** argv) { return jslu::cli::run(argc, argv); }
