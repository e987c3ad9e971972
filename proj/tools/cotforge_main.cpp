#include "cotforge/cli.hpp"

int main(int argc, char** argv) {
    return cotforge::cli::run(argc, argv);
}
