#include "commands.hpp"

int main(int argc, char** argv) {
    return ptosis::cli::run(argc, argv);
}
