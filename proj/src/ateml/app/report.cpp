#include "ateml/app/report.hpp"

#include "ateml/core/error.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace ateml {
namespace {

using json = nlohmann::ordered_json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json pairs_to_json(const std::vector<std::pair<std::string, double>>& pairs) {
  json out = json::object();
  for (const auto& [k, v] : pairs) out[k] = number(v);
  return out;
}

std::vector<std::pair<std::string, double>> pairs_from_json(const json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [k, v] : j.items()) out.emplace_back(k, read_number(v));
  return out;
}

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::vector<double> read_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(read_number(v));
  return out;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

bool same(const std::vector<std::pair<std::string, double>>& a, const std::vector<std::pair<std::string, double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].first != b[i].first || !same(a[i].second, b[i].second)) return false;
  return true;
}

CtmleVariant parse_variant(const std::string& s) {
  for (auto v : {CtmleVariant::greedy, CtmleVariant::logistic, CtmleVariant::correlation, CtmleVariant::lasso})
    if (to_string(v) == s) return v;
  throw InvalidArgument("cli", "report: unknown ctmle variant '" + s + "'");
}

json config_json(const RunConfig& c) {
  json j;
  j["data"] = c.data;
  j["treatment"] = c.treatment;
  j["outcome"] = c.outcome;
  j["covariates"] = c.covariates;
  j["estimator"] = c.estimator;
  j["ps_learner"] = c.ps_learner;
  j["outcome_learner"] = c.outcome_learner;
  j["joint_outcome"] = c.joint_outcome;
  j["v_folds"] = c.v_folds;
  j["seed"] = c.seed;
  j["bootstrap"] = c.bootstrap;
  j["trim"] = c.trim;
  j["dml_k"] = c.dml_k;
  j["dml_s"] = c.dml_s;
  j["dml_aggregate"] = c.dml_aggregate;
  j["post_method"] = c.post_method;
  j["out"] = c.out;
  j["threads"] = c.threads;
  return j;
}

RunConfig config_from(const json& j) {
  RunConfig c;
  c.data = j.at("data").get<std::string>();
  c.treatment = j.at("treatment").get<std::string>();
  c.outcome = j.at("outcome").get<std::string>();
  c.covariates = j.at("covariates").get<std::vector<std::string>>();
  c.estimator = j.at("estimator").get<std::string>();
  c.ps_learner = j.at("ps_learner").get<std::string>();
  c.outcome_learner = j.at("outcome_learner").get<std::string>();
  c.joint_outcome = j.at("joint_outcome").get<bool>();
  c.v_folds = j.at("v_folds").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.bootstrap = j.at("bootstrap").get<int>();
  c.trim = j.at("trim").get<double>();
  c.dml_k = j.at("dml_k").get<int>();
  c.dml_s = j.at("dml_s").get<int>();
  c.dml_aggregate = j.at("dml_aggregate").get<std::string>();
  c.post_method = j.at("post_method").get<std::string>();
  c.out = j.at("out").get<std::string>();
  c.threads = j.at("threads").get<int>();
  return c;
}

}  // namespace

std::string RunReport::to_json(bool include_timings) const {
  json j;
  j["schema"] = kReportSchema;
  j["config"] = config_json(config);
  j["data"] = {{"n", n},
               {"d", d},
               {"total_rows", total_rows},
               {"dropped_rows", dropped_rows},
               {"treated", treated},
               {"outcome_kind", outcome_kind},
               {"covariates", covariates}};
  j["result"] = {{"method", method},
                 {"estimate", number(estimate)},
                 {"se", number(se)},
                 {"ci_lo", number(ci_lo)},
                 {"ci_hi", number(ci_hi)},
                 {"se_kind", se_kind},
                 {"diagnostics", pairs_to_json(diagnostics)}};
  if (balance) {
    j["balance"] = {{"adjustment", balance->adjustment},
                    {"asam_unweighted", number(balance->asam_unweighted)},
                    {"asam_adjusted", number(balance->asam_adjusted)},
                    {"flagged_unweighted", balance->flagged_unweighted},
                    {"flagged_adjusted", balance->flagged_adjusted}};
  } else {
    j["balance"] = nullptr;
  }
  json tables = json::array();
  for (const auto& t : sl_tables)
    tables.push_back({{"role", t.role}, {"names", t.names}, {"weights", numbers(t.weights)}, {"cv_risk", numbers(t.cv_risk)}});
  j["sl_weights"] = tables;
  if (ctmle) {
    json cands = json::array();
    for (const auto& c : ctmle->candidates)
      cands.push_back({{"covariates", c.covariates},
                       {"lambda", number(c.lambda)},
                       {"cv_loss", number(c.cv_loss)},
                       {"empirical_loss", number(c.empirical_loss)},
                       {"estimate", number(c.estimate)},
                       {"restarted", c.restarted}});
    j["ctmle"] = {{"variant", std::string(to_string(ctmle->variant))},
                  {"chosen", ctmle->chosen},
                  {"order", ctmle->order},
                  {"order_score", numbers(ctmle->order_score)},
                  {"ps_fits", ctmle->ps_fits},
                  {"restarts", ctmle->restarts},
                  {"candidates", cands}};
  } else {
    j["ctmle"] = nullptr;
  }
  j["warnings"] = warnings;
  if (include_timings) j["timings"] = pairs_to_json(timings);
  return j.dump(2) + "\n";
}

RunReport RunReport::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidArgument("cli", std::string("report: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<int>() != kReportSchema) throw InvalidArgument("cli", "report: unsupported schema version");
    RunReport r;
    r.config = config_from(j.at("config"));
    const json& data = j.at("data");
    r.n = data.at("n").get<Index>();
    r.d = data.at("d").get<Index>();
    r.total_rows = data.at("total_rows").get<Index>();
    r.dropped_rows = data.at("dropped_rows").get<Index>();
    r.treated = data.at("treated").get<Index>();
    r.outcome_kind = data.at("outcome_kind").get<std::string>();
    r.covariates = data.at("covariates").get<std::vector<std::string>>();
    const json& res = j.at("result");
    r.method = res.at("method").get<std::string>();
    r.estimate = read_number(res.at("estimate"));
    r.se = read_number(res.at("se"));
    r.ci_lo = read_number(res.at("ci_lo"));
    r.ci_hi = read_number(res.at("ci_hi"));
    r.se_kind = res.at("se_kind").get<std::string>();
    r.diagnostics = pairs_from_json(res.at("diagnostics"));
    if (!j.at("balance").is_null()) {
      const json& b = j.at("balance");
      r.balance = BalanceSummary{b.at("adjustment").get<std::string>(), read_number(b.at("asam_unweighted")),
                                 read_number(b.at("asam_adjusted")), b.at("flagged_unweighted").get<int>(),
                                 b.at("flagged_adjusted").get<int>()};
    }
    for (const auto& t : j.at("sl_weights"))
      r.sl_tables.push_back({t.at("role").get<std::string>(), t.at("names").get<std::vector<std::string>>(),
                             read_numbers(t.at("weights")), read_numbers(t.at("cv_risk"))});
    if (!j.at("ctmle").is_null()) {
      const json& c = j.at("ctmle");
      CtmleTrace trace;
      trace.variant = parse_variant(c.at("variant").get<std::string>());
      trace.chosen = c.at("chosen").get<std::size_t>();
      trace.order = c.at("order").get<std::vector<Index>>();
      trace.order_score = read_numbers(c.at("order_score"));
      trace.ps_fits = c.at("ps_fits").get<int>();
      trace.restarts = c.at("restarts").get<int>();
      for (const auto& cj : c.at("candidates")) {
        CtmleCandidate cand;
        cand.covariates = cj.at("covariates").get<std::vector<Index>>();
        cand.lambda = read_number(cj.at("lambda"));
        cand.cv_loss = read_number(cj.at("cv_loss"));
        cand.empirical_loss = read_number(cj.at("empirical_loss"));
        cand.estimate = read_number(cj.at("estimate"));
        cand.restarted = cj.at("restarted").get<bool>();
        trace.candidates.push_back(std::move(cand));
      }
      r.ctmle = std::move(trace);
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("timings")) r.timings = pairs_from_json(j.at("timings"));
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidArgument("cli", std::string("report: malformed document: ") + e.what());
  }
}

std::string RunReport::summary_line() const {
  std::ostringstream os;
  os.precision(6);
  os << "ATE=" << estimate << " SE=" << se << " CI95=[" << ci_lo << "," << ci_hi << "] method=" << method;
  return os.str();
}

bool same_report(const RunReport& a, const RunReport& b, bool compare_timings) {
  if (!(a.config == b.config) || a.n != b.n || a.d != b.d || a.total_rows != b.total_rows ||
      a.dropped_rows != b.dropped_rows || a.treated != b.treated || a.outcome_kind != b.outcome_kind ||
      a.covariates != b.covariates || a.method != b.method || !same(a.estimate, b.estimate) || !same(a.se, b.se) ||
      !same(a.ci_lo, b.ci_lo) || !same(a.ci_hi, b.ci_hi) || a.se_kind != b.se_kind ||
      !same(a.diagnostics, b.diagnostics) || a.warnings != b.warnings)
    return false;
  if (a.balance.has_value() != b.balance.has_value()) return false;
  if (a.balance) {
    const auto &x = *a.balance, &y = *b.balance;
    if (x.adjustment != y.adjustment || !same(x.asam_unweighted, y.asam_unweighted) ||
        !same(x.asam_adjusted, y.asam_adjusted) || x.flagged_unweighted != y.flagged_unweighted ||
        x.flagged_adjusted != y.flagged_adjusted)
      return false;
  }
  if (a.sl_tables.size() != b.sl_tables.size()) return false;
  for (std::size_t i = 0; i < a.sl_tables.size(); ++i) {
    const auto &x = a.sl_tables[i], &y = b.sl_tables[i];
    if (x.role != y.role || x.names != y.names || !same(x.weights, y.weights) || !same(x.cv_risk, y.cv_risk)) return false;
  }
  if (a.ctmle.has_value() != b.ctmle.has_value()) return false;
  if (a.ctmle) {
    const auto &x = *a.ctmle, &y = *b.ctmle;
    if (x.variant != y.variant || x.chosen != y.chosen || x.order != y.order || !same(x.order_score, y.order_score) ||
        x.ps_fits != y.ps_fits || x.restarts != y.restarts || x.candidates.size() != y.candidates.size())
      return false;
    for (std::size_t i = 0; i < x.candidates.size(); ++i) {
      const auto &p = x.candidates[i], &q = y.candidates[i];
      if (p.covariates != q.covariates || !same(p.lambda, q.lambda) || !same(p.cv_loss, q.cv_loss) ||
          !same(p.empirical_loss, q.empirical_loss) || !same(p.estimate, q.estimate) || p.restarted != q.restarted)
        return false;
    }
  }
  return !compare_timings || same(a.timings, b.timings);
}

}  // namespace ateml
