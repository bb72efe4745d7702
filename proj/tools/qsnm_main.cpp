#include "qsnm/cli.hpp"

int main(int argc, char** argv) {
    return qsnm::cli_main(std::vector<std::string>(argv, argv + argc));
}
