#include <iostream>
#include <string>
#include <vector>

#include "app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qe::tool::run_app(args, std::cout, std::cerr, qe::JudgeEnvironment::from_process());
}
