#include "choitomo/cli.hpp"

int main(int argc, char** argv) {
  return choitomo::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
