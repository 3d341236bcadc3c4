#include "lungaug/cli/app.hpp"

int main(int argc, char** argv) { return lungaug::cli::run(argc, argv); }
