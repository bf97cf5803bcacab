#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "czlm/cli/config.hpp"

namespace czlm::cli {

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every command writes into config.out and returns the artifacts it produced. Each run
// directory gets resolved_config.ini and run_info.json.
std::vector<std::string> cmd_tokenizer_train(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log);
std::vector<std::string> cmd_pretrain(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log);
std::vector<std::string> cmd_probe(const ExperimentConfig& config, const RawConfig& raw, std::ostream& log);

// kind: conllu, mrp, spans or sentiment.
std::vector<std::string> cmd_evaluate(const std::string& kind, const std::string& gold, const std::string& system,
                                      const std::string& out, std::ostream& log);

// Collects metrics.json from every run directory below `root` into one table.
std::vector<std::string> cmd_report(const std::string& root, std::ostream& log);

// True when every path exists and is a non-empty file.
bool artifacts_valid(const std::vector<std::string>& paths);

}  // namespace czlm::cli
