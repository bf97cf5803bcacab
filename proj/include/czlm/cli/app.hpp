#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace czlm::cli {

// Exit codes: 0 success, 1 runtime failure or missing artifact, 2 usage or configuration error.
int run_app(const std::vector<std::string>& args, const std::map<std::string, std::string>& env, std::ostream& out,
            std::ostream& err);

}  // namespace czlm::cli
