#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "czlm/cli/app.hpp"

extern char** environ;

int main(int argc, char** argv) {
  std::map<std::string, std::string> env;
  for (char** e = environ; *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && entry.rfind("CZLM_", 0) == 0) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return czlm::cli::run_app(std::vector<std::string>(argv + 1, argv + argc), env, std::cout, std::cerr);
}
