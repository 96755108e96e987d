#include "liteshield/cli.hpp"

int main(int argc, char** argv) {
    return liteshield::run_cli(argc, argv);
}
