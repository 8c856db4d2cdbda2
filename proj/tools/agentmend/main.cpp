#include <iostream>

#include "agentmend/cli.hpp"

int main(int argc, char** argv) {
  return agentmend::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
