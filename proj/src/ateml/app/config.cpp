#include "ateml/app/config.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ateml {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InvalidArgument("cli", "config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidArgument("cli", "config key '" + key + "': expected true or false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

const std::vector<std::string> kEstimatorIds = {"naive",  "reg",          "iptw",         "match",
                                                "aiptw",  "tmle",         "dml",          "double_lasso",
                                                "ctmle_greedy", "ctmle_logistic", "ctmle_correlation",
                                                "ctmle_lasso"};

void RunConfig::validate() const {
  if (std::find(kEstimatorIds.begin(), kEstimatorIds.end(), estimator) == kEstimatorIds.end())
    throw InvalidArgument("cli", "unknown estimator '" + estimator + "'");
  if (treatment.empty() || outcome.empty()) throw InvalidArgument("cli", "treatment and outcome columns are required");
  if (v_folds < 2) throw InvalidArgument("cli", "v_folds must be at least 2");
  if (bootstrap != 0 && bootstrap < 100) throw InvalidArgument("cli", "bootstrap must be 0 or at least 100");
  if (!(trim > 0.0 && trim < 0.5)) throw InvalidArgument("cli", "trim must lie in (0, 0.5)");
  if (dml_k < 2 || dml_s < 1) throw InvalidArgument("cli", "dml_k must be >= 2 and dml_s >= 1");
  if (dml_aggregate != "mean" && dml_aggregate != "median")
    throw InvalidArgument("cli", "dml_aggregate must be mean or median");
  if (post_method != "reg" && post_method != "iptw" && post_method != "aiptw")
    throw InvalidArgument("cli", "post_method must be reg, iptw or aiptw");
  if (threads < 0) throw InvalidArgument("cli", "threads must be non-negative");
}

RunConfig parse_run_config(const std::string& text, RunConfig c) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("cli", "config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "data") c.data = value;
    else if (key == "treatment") c.treatment = value;
    else if (key == "outcome") c.outcome = value;
    else if (key == "covariates") c.covariates = split_list(value);
    else if (key == "estimator") c.estimator = value;
    else if (key == "ps_learner") c.ps_learner = value;
    else if (key == "outcome_learner") c.outcome_learner = value;
    else if (key == "joint_outcome") c.joint_outcome = parse_bool(key, value);
    else if (key == "v_folds") c.v_folds = parse_value<int>(key, value);
    else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "bootstrap") c.bootstrap = parse_value<int>(key, value);
    else if (key == "trim") c.trim = parse_value<double>(key, value);
    else if (key == "dml_k") c.dml_k = parse_value<int>(key, value);
    else if (key == "dml_s") c.dml_s = parse_value<int>(key, value);
    else if (key == "dml_aggregate") c.dml_aggregate = value;
    else if (key == "post_method") c.post_method = value;
    else if (key == "out") c.out = value;
    else if (key == "threads") c.threads = parse_value<int>(key, value);
    else throw InvalidArgument("cli", "unknown config key '" + key + "'");
  }
  return c;
}

std::string serialize_run_config(const RunConfig& c) {
  std::string covs;
  for (const auto& name : c.covariates) covs += (covs.empty() ? "" : ",") + name;
  std::ostringstream os;
  os << "data = " << c.data << '\n'
     << "treatment = " << c.treatment << '\n'
     << "outcome = " << c.outcome << '\n'
     << "covariates = " << covs << '\n'
     << "estimator = " << c.estimator << '\n'
     << "ps_learner = " << c.ps_learner << '\n'
     << "outcome_learner = " << c.outcome_learner << '\n'
     << "joint_outcome = " << (c.joint_outcome ? "true" : "false") << '\n'
     << "v_folds = " << c.v_folds << '\n'
     << "seed = " << c.seed << '\n'
     << "bootstrap = " << c.bootstrap << '\n'
     << "trim = " << format_double(c.trim) << '\n'
     << "dml_k = " << c.dml_k << '\n'
     << "dml_s = " << c.dml_s << '\n'
     << "dml_aggregate = " << c.dml_aggregate << '\n'
     << "post_method = " << c.post_method << '\n'
     << "out = " << c.out << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace ateml
