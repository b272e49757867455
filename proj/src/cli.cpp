#include "ekma/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>
#include <utility>

#include "ekma/config.hpp"
#include "ekma/error.hpp"
#include "ekma/parallel.hpp"
#include "ekma/pipeline.hpp"

namespace ekma {

namespace {

using Stage = std::function<void(const PipelineConfig&, std::ostream&)>;

struct Flags {
  std::string config_path;
  std::string seed;
  std::string threads;
  std::string output;
  std::string data_dir;
  std::vector<std::string> settings;
  bool synthetic = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "config file (section.key = value lines)");
  cmd->add_option("--seed", f.seed, "seed for the forest, importance and synthetic generator");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = auto");
  cmd->add_option("--output", f.output, "output directory");
  cmd->add_option("--data-dir", f.data_dir, "directory holding downloaded archives");
  cmd->add_option("--set", f.settings, "override a config key, e.g. --set forest.num_trees=100")
      ->type_name("KEY=VALUE");
}

PipelineConfig resolve(const Flags& f) {
  PipelineConfig config;
  if (!f.config_path.empty()) load_config_file(f.config_path, config);
  if (const char* env = std::getenv("EKMA_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    config.output_dir = env;
  }
  if (!f.seed.empty()) {
    apply_setting(config, "forest.seed", f.seed);
    apply_setting(config, "synth.seed", f.seed);
  }
  if (!f.threads.empty()) apply_setting(config, "run.threads", f.threads);
  if (!f.output.empty()) apply_setting(config, "output.dir", f.output);
  if (!f.data_dir.empty()) apply_setting(config, "data.dir", f.data_dir);
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("--set expects KEY=VALUE, got \"" + s + "\"");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  config.validate();
  return config;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ozone surrogate modelling and EKMA regime diagnosis", args.empty() ? "ekma" : args.front()};
  app.require_subcommand(1);
  app.fallthrough(false);

  Flags flags;
  const std::vector<std::pair<std::string, Stage>> stages = {
      {"fetch", pipeline::fetch},       {"ingest", pipeline::ingest},         {"features", pipeline::features},
      {"impute", pipeline::impute},     {"train", pipeline::train},           {"evaluate", pipeline::evaluate},
      {"importance", pipeline::importance}, {"climatology", pipeline::climatology}, {"ekma", pipeline::ekma},
      {"synth", pipeline::synth},
  };
  const std::map<std::string, std::string> help = {
      {"fetch", "download the yearly hourly archives"},
      {"ingest", "parse, QC, pivot and coverage-filter into records.csv"},
      {"features", "build the predictor matrix"},
      {"impute", "KNN-impute missing predictors"},
      {"train", "fit the random forest on the training year"},
      {"evaluate", "score the model on the test year"},
      {"importance", "permutation importance on the test year"},
      {"climatology", "monthly, seasonal-diurnal and weekday/weekend summaries"},
      {"ekma", "response surface, isopleths and regime diagnosis"},
      {"synth", "write synthetic records.csv with a planted regime"},
  };
  std::map<CLI::App*, Stage> commands;
  for (const auto& [name, stage] : stages) {
    CLI::App* cmd = app.add_subcommand(name, help.at(name));
    add_common(cmd, flags);
    commands[cmd] = stage;
  }
  CLI::App* all_cmd = app.add_subcommand("all", "run every stage in order");
  add_common(all_cmd, flags);
  all_cmd->add_flag("--synthetic", flags.synthetic, "use synth instead of ingest");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const PipelineConfig config = resolve(flags);
    set_thread_count(config.threads);
    if (all_cmd->parsed()) {
      pipeline::all(config, flags.synthetic, out);
    } else {
      for (const auto& [cmd, stage] : commands) {
        if (cmd->parsed()) stage(config, out);
      }
    }
  } catch (const std::exception& e) {
    err << "ekma: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace ekma
