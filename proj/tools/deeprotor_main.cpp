#include <string>
#include <vector>

#include "deeprotor/cli.hpp"

int main(int argc, char** argv) {
    return deeprotor::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
