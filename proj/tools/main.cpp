// Command-line front end: one subcommand per pipeline stage.

#include "fiberbayes/error.hpp"
#include "fiberbayes/io.hpp"
#include "fiberbayes/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

struct Flag {
  const char* name;
  const char* help;
};

// Long flags shared by all subcommands; each maps onto the config key of
// the same name.
const std::vector<Flag> kFlags = {
    {"input", "input curve file"},
    {"out", "output directory"},
    {"truth", "ground-truth partition CSV (id,label)"},
    {"estimate", "estimated partition CSV (eval)"},
    {"basis", "persisted shape basis (JSON)"},
    {"decomposition", "decomposition table (reconstruct)"},
    {"preset", "synthetic preset: two-bundle, population, test-retest"},
    {"components", "feature components: any of trans,shape,rot or all"},
    {"K", "truncation level (clusters / subject clusters)"},
    {"L", "fiber-level truncation for fit-ndp"},
    {"iters", "total sampler iterations"},
    {"burnin", "burn-in iterations"},
    {"thin", "keep every n-th draw after burn-in"},
    {"seed", "random seed (required for stochastic stages)"},
    {"min-fibers", "drop scans with fewer fibers (0 disables)"},
    {"grid", "common grid size after resampling"},
    {"basis-size", "number of FPCA coefficients"},
    {"basis-fibers", "learn the basis from at most this many fibers"},
    {"template-iters", "template estimation iterations"},
    {"param-stride", "store cluster parameters every n-th draw"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian clustering of white-matter fiber curves"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file; flags take precedence");

  std::map<std::string, std::string> flag_values;
  bool joint_counts = false;
  for (const char* name : {"synth", "decompose", "fit-single", "fit-ndp", "eval", "reconstruct"}) {
    CLI::App* sub = app.add_subcommand(name);
    for (const Flag& f : kFlags) sub->add_option(std::string("--") + f.name, flag_values[f.name], f.help);
    sub->add_flag("--joint-counts", joint_counts, "model connection counts jointly with fiber features");
    sub->add_option("--config", config_path, "key = value settings file; flags take precedence");
  }
  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    std::map<std::string, std::string> settings;
    if (!config_path.empty()) settings = fiberbayes::load_config(config_path);
    if (const char* env = std::getenv(fiberbayes::kOutDirEnv); env && *env) settings["out"] = env;
    for (const Flag& f : kFlags) {
      if (sub->count(std::string("--") + f.name) > 0) settings[f.name] = flag_values[f.name];
    }
    if (sub->count("--joint-counts") > 0) settings["joint-counts"] = joint_counts ? "true" : "false";
    const auto config =
        fiberbayes::RunConfig::from_settings(fiberbayes::parse_stage(sub->get_name()), settings);
    return fiberbayes::run(config, std::cerr);
  } catch (const fiberbayes::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
