#include <ateml/ateml.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Flag {
  const char* name;
  const char* help;
  std::string value;
};

std::vector<Flag> config_flags() {
  return {
      {"data", "input CSV file", {}},
      {"treatment", "treatment column (default A)", {}},
      {"outcome", "outcome column (default Y)", {}},
      {"covariates", "comma-separated covariate columns (default: all others)", {}},
      {"estimator", "naive|reg|iptw|match|aiptw|tmle|dml|double_lasso|ctmle_greedy|ctmle_logistic|"
                    "ctmle_correlation|ctmle_lasso",
       {}},
      {"ps-learner", "learner spec, sl, sl_default or balance_boost", {}},
      {"outcome-learner", "learner spec, sl or sl_default", {}},
      {"v-folds", "cross-validation folds", {}},
      {"seed", "random seed", {}},
      {"bootstrap", "bootstrap replicates (0 = none)", {}},
      {"trim", "propensity score trimming level", {}},
      {"dml-k", "DML folds", {}},
      {"dml-s", "DML repetitions", {}},
      {"out", "output path", {}},
      {"threads", "worker threads (0 = all cores)", {}},
  };
}

void add_config_flags(CLI::App* cmd, std::vector<Flag>& flags, std::string& config_path) {
  cmd->add_option("--config", config_path, "key = value configuration file");
  for (auto& f : flags) cmd->add_option(std::string("--") + f.name, f.value, f.help);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

// Config file first, then one override line per flag given on the command line.
std::string config_text(CLI::App* cmd, const std::vector<Flag>& flags, const std::string& config_path,
                        const std::vector<std::string>& skip = {}) {
  std::string text;
  if (!config_path.empty() && !read_file(config_path, text)) {
    std::fprintf(stderr,
                 "{\"status\":\"io\",\"code\":4,\"module\":\"cli\",\"message\":\"cannot read config file '%s'\"}\n",
                 config_path.c_str());
    std::exit(4);
  }
  if (!text.empty() && text.back() != '\n') text += '\n';
  for (const auto& f : flags) {
    if (cmd->count(std::string("--") + f.name) == 0) continue;
    bool skipped = false;
    for (const auto& s : skip) skipped = skipped || s == f.name;
    if (!skipped) text += std::string(f.name) + " = " + f.value + "\n";
  }
  return text;
}

int report_failure(ateml_status status) {
  std::fprintf(stderr, "%s\n", ateml_last_error_json());
  return static_cast<int>(status);
}

int emit(const char* text, const std::string& out) {
  if (out.empty()) {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) {
    std::fprintf(stderr, "{\"status\":\"io\",\"code\":4,\"module\":\"cli\",\"message\":\"cannot write '%s'\"}\n",
                 out.c_str());
    return 4;
  }
  return 0;
}

std::string flag_value(const std::vector<Flag>& flags, const char* name) {
  for (const auto& f : flags)
    if (std::string(f.name) == name) return f.value;
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average treatment effect estimation with machine learning nuisances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ateml_version());

  std::string run_config;
  auto run_flags = config_flags();
  CLI::App* run = app.add_subcommand("run", "estimate the ATE and write a JSON report");
  add_config_flags(run, run_flags, run_config);

  std::string bal_config;
  auto bal_flags = config_flags();
  std::vector<std::string> adjustments;
  CLI::App* bal = app.add_subcommand("balance", "covariate balance table as CSV");
  add_config_flags(bal, bal_flags, bal_config);
  bal->add_option("--adjust", adjustments,
                  "adjustments: iptw_ps iptw_logistic iptw_boosted iptw_sl match_ps match_logistic match_boosted")
      ->delimiter(',');

  std::string sim_config;
  auto sim_flags = config_flags();
  std::string sim_spec;
  std::string sim_estimators = "naive";
  int replications = 200;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo evaluation on a data-generating process");
  add_config_flags(sim, sim_flags, sim_config);
  sim->add_option("--spec", sim_spec, "builtin spec name or JSON spec file")->required();
  sim->add_option("--estimators", sim_estimators, "comma-separated estimator ids (iptw_true allowed)");
  sim->add_option("--replications,-R", replications, "Monte Carlo replications")->check(CLI::PositiveNumber);

  std::string exp_spec;
  std::uint64_t exp_seed = 1;
  std::int64_t exp_n = 0;
  std::string exp_out;
  CLI::App* exp = app.add_subcommand("export-dgp", "write a synthetic dataset as CSV");
  exp->add_option("--spec", exp_spec, "builtin spec name or JSON spec file")->required();
  exp->add_option("--seed", exp_seed, "random seed");
  exp->add_option("--n", exp_n, "sample size (default: the process's own)");
  exp->add_option("--out", exp_out, "output CSV (default: standard output)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    char* report = nullptr;
    char* summary = nullptr;
    const ateml_status s = ateml_run(config_text(run, run_flags, run_config).c_str(), &report, &summary);
    if (s != ATEML_OK) return report_failure(s);
    std::printf("%s\n", summary);
    ateml_string_free(report);
    ateml_string_free(summary);
    return 0;
  }
  if (bal->parsed()) {
    std::string list;
    for (const auto& a : adjustments) list += (list.empty() ? "" : ",") + a;
    char* csv = nullptr;
    const ateml_status s = ateml_balance(config_text(bal, bal_flags, bal_config, {"out"}).c_str(), list.c_str(), &csv);
    if (s != ATEML_OK) return report_failure(s);
    const int rc = emit(csv, flag_value(bal_flags, "out"));
    ateml_string_free(csv);
    return rc;
  }
  if (sim->parsed()) {
    const std::string seed = flag_value(sim_flags, "seed");
    std::uint64_t mc_seed = 1;
    try {
      if (!seed.empty()) mc_seed = std::stoull(seed);
    } catch (const std::exception&) {
      std::fprintf(stderr,
                   "{\"status\":\"invalid_argument\",\"code\":1,\"module\":\"cli\",\"message\":\"bad seed\"}\n");
      return 1;
    }
    char* csv = nullptr;
    const ateml_status s = ateml_simulate(sim_spec.c_str(), sim_estimators.c_str(), replications, mc_seed,
                                          config_text(sim, sim_flags, sim_config, {"out"}).c_str(), &csv);
    if (s != ATEML_OK) return report_failure(s);
    const int rc = emit(csv, flag_value(sim_flags, "out"));
    ateml_string_free(csv);
    return rc;
  }
  char* csv = nullptr;
  const ateml_status s = ateml_export_dgp(exp_spec.c_str(), exp_seed, exp_n, &csv);
  if (s != ATEML_OK) return report_failure(s);
  const int rc = emit(csv, exp_out);
  ateml_string_free(csv);
  return rc;
}
