#include "czlm/cli/app.hpp"

#include <CLI11.hpp>

#include "czlm/cli/commands.hpp"
#include "czlm/cli/config.hpp"

#ifndef CZLM_VERSION
#define CZLM_VERSION "0.0.0"
#endif

namespace czlm::cli {

int run_app(const std::vector<std::string>& args, const std::map<std::string, std::string>& env, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Czech subword language model toolkit", "czlm"};
  app.set_version_flag("--version", CZLM_VERSION);
  app.require_subcommand(1);

  std::vector<std::string> config_files, overrides;
  std::string seed, threads, out_dir;
  app.add_option("-c,--config", config_files, "INI configuration file; later files override earlier ones")
      ->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override one key, e.g. --set pretrain.steps=200");
  app.add_option("--seed", seed, "Master seed (run.seed)");
  app.add_option("--threads", threads, "Worker threads (run.threads)");
  app.add_option("-o,--out", out_dir, "Output directory (run.out)");

  auto* tok = app.add_subcommand("tokenizer-train", "Train the byte-level BPE vocabulary");
  auto* pre = app.add_subcommand("pretrain", "Pretrain the masked language model");
  std::string task, checkpoint;
  auto* probe = app.add_subcommand("probe", "Train a task head on a frozen or absent encoder");
  probe->add_option("--task", task, "tagger or sentiment (probe.task)");
  probe->add_option("--checkpoint", checkpoint, "Encoder checkpoint (probe.checkpoint)");
  std::string kind, gold, system;
  auto* eval = app.add_subcommand("evaluate", "Score a system file against gold");
  eval->add_option("kind", kind, "conllu, mrp, spans or sentiment")->required();
  eval->add_option("gold", gold, "Gold file")->required()->check(CLI::ExistingFile);
  eval->add_option("system", system, "System file")->required()->check(CLI::ExistingFile);
  std::string run_dir;
  auto* report = app.add_subcommand("report", "Collect metrics.json files into one table");
  report->add_option("run_dir", run_dir, "Directory holding run subdirectories")->required();
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration with provenance");
  for (auto* sub : {tok, pre, probe, eval, report, show}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    RawConfig raw;
    for (const auto& f : config_files) raw.merge_file(f);
    raw.apply_environment(env);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError({"--set expects key=value, got '" + o + "'"});
      raw.set(o.substr(0, eq), o.substr(eq + 1), Source::Flag, "--set");
    }
    if (!seed.empty()) raw.set("run.seed", seed);
    if (!threads.empty()) raw.set("run.threads", threads);
    if (!out_dir.empty()) raw.set("run.out", out_dir);
    if (!task.empty()) raw.set("probe.task", task);
    if (!checkpoint.empty()) raw.set("probe.checkpoint", checkpoint);
    const auto config = resolve_config(raw);

    std::vector<std::string> artifacts;
    if (*show) {
      out << raw.resolved_ini();
      return 0;
    } else if (*tok) {
      artifacts = cmd_tokenizer_train(config, raw, out);
    } else if (*pre) {
      artifacts = cmd_pretrain(config, raw, out);
    } else if (*probe) {
      artifacts = cmd_probe(config, raw, out);
    } else if (*eval) {
      artifacts = cmd_evaluate(kind, gold, system, config.out, out);
    } else {
      artifacts = cmd_report(run_dir, out);
    }
    if (!artifacts_valid(artifacts)) {
      err << "error: an expected artifact is missing or empty\n";
      return 1;
    }
    for (const auto& a : artifacts) out << "wrote " << a << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error:\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace czlm::cli
