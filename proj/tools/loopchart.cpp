#include <loopchart/cli.hpp>

int main(int argc, char** argv) {
  return loopchart::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
