#include "cli.hpp"

int main(int argc, char** argv) {
    return nextkey::cli::main(argc, argv);
}
