#include "ateml/core/learner.hpp"

#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ateml {
namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw InvalidArgument("core", "learner spec: bad number for '" + std::string(key) + "'");
  return v;
}

long long parse_int(std::string_view key, std::string_view value) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InvalidArgument("core", "learner spec: bad integer for '" + std::string(key) + "'");
  return v;
}

}  // namespace

LearnerSpec LearnerSpec::defaults(LearnerFamily family) {
  LearnerSpec s;
  s.family = family;
  switch (family) {
    case LearnerFamily::tree:
      s.max_depth = 5;
      s.min_leaf = 5;
      break;
    case LearnerFamily::forest:
      s.n_trees = 500;
      s.min_leaf = 5;
      break;
    case LearnerFamily::boost:
      s.n_trees = 100;
      s.max_depth = 2;
      s.shrinkage = 0.1;
      s.min_leaf = 10;
      break;
    default:
      break;
  }
  return s;
}

void LearnerSpec::validate(Eigen::Index d) const {
  auto bad = [](const std::string& msg) { throw InvalidArgument("core", "learner spec: " + msg); };
  if (ridge < 0.0) bad("ridge must be >= 0");
  if (lambda && !(*lambda >= 0.0)) bad("lambda must be >= 0");
  if (min_leaf < 1) bad("min_leaf must be >= 1");
  if (max_depth < 0) bad("max_depth must be >= 0");
  switch (family) {
    case LearnerFamily::tree:
      if (max_depth < 1) bad("tree max_depth must be >= 1");
      break;
    case LearnerFamily::forest:
      if (n_trees < 1) bad("forest needs n_trees >= 1");
      if (mtry < 0 || mtry > d) bad("mtry must lie in 1..d");
      break;
    case LearnerFamily::boost:
      if (n_trees < 1) bad("boost needs n_trees >= 1");
      if (max_depth < 1) bad("boost max_depth must be >= 1");
      if (!(shrinkage > 0.0 && shrinkage <= 1.0)) bad("shrinkage must lie in (0, 1]");
      break;
    default:
      break;
  }
}

std::string_view to_string(LearnerFamily family) noexcept {
  switch (family) {
    case LearnerFamily::mean: return "mean";
    case LearnerFamily::ols: return "ols";
    case LearnerFamily::logistic: return "logistic";
    case LearnerFamily::lasso: return "lasso";
    case LearnerFamily::tree: return "tree";
    case LearnerFamily::forest: return "forest";
    case LearnerFamily::boost: return "boost";
  }
  return "ols";
}

std::string_view to_string(TargetKind kind) noexcept {
  return kind == TargetKind::regression ? "regression" : "probability";
}

std::string LearnerSpec::to_string() const {
  std::vector<std::string> kv;
  const LearnerSpec base = defaults(family);
  auto add = [&](const std::string& k, const std::string& v) { kv.push_back(k + "=" + v); };
  switch (family) {
    case LearnerFamily::mean:
      break;
    case LearnerFamily::ols:
      if (interactions) add("interactions", "1");
      break;
    case LearnerFamily::logistic:
      if (interactions) add("interactions", "1");
      if (ridge != base.ridge) add("ridge", format_double(ridge));
      break;
    case LearnerFamily::lasso:
      if (interactions) add("interactions", "1");
      if (lambda) add("lambda", format_double(*lambda));
      if (seed != 0) add("seed", std::to_string(seed));
      break;
    case LearnerFamily::tree:
      add("depth", std::to_string(max_depth));
      add("min_leaf", std::to_string(min_leaf));
      break;
    case LearnerFamily::forest:
      add("trees", std::to_string(n_trees));
      add("mtry", std::to_string(mtry));
      add("min_leaf", std::to_string(min_leaf));
      if (max_depth != 0) add("depth", std::to_string(max_depth));
      if (!bootstrap) add("bootstrap", "0");
      if (seed != 0) add("seed", std::to_string(seed));
      break;
    case LearnerFamily::boost:
      add("trees", std::to_string(n_trees));
      add("depth", std::to_string(max_depth));
      add("shrinkage", format_double(shrinkage));
      add("min_leaf", std::to_string(min_leaf));
      break;
  }
  std::string out(ateml::to_string(family));
  for (std::size_t i = 0; i < kv.size(); ++i) out += (i == 0 ? ":" : ",") + kv[i];
  return out;
}

LearnerSpec parse_learner_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  LearnerFamily family;
  if (name == "mean") family = LearnerFamily::mean;
  else if (name == "ols") family = LearnerFamily::ols;
  else if (name == "logistic") family = LearnerFamily::logistic;
  else if (name == "lasso") family = LearnerFamily::lasso;
  else if (name == "tree") family = LearnerFamily::tree;
  else if (name == "forest") family = LearnerFamily::forest;
  else if (name == "boost") family = LearnerFamily::boost;
  else throw InvalidArgument("core", "unknown learner family '" + std::string(name) + "'");

  LearnerSpec spec = LearnerSpec::defaults(family);
  if (colon == std::string_view::npos) return spec;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("core", "learner spec: expected key=value, got '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "interactions") spec.interactions = parse_int(key, value) != 0;
    else if (key == "ridge") spec.ridge = parse_double(key, value);
    else if (key == "lambda") spec.lambda = parse_double(key, value);
    else if (key == "depth") spec.max_depth = static_cast<int>(parse_int(key, value));
    else if (key == "min_leaf") spec.min_leaf = static_cast<int>(parse_int(key, value));
    else if (key == "trees") spec.n_trees = static_cast<int>(parse_int(key, value));
    else if (key == "mtry") spec.mtry = static_cast<int>(parse_int(key, value));
    else if (key == "shrinkage") spec.shrinkage = parse_double(key, value);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "bootstrap") spec.bootstrap = parse_int(key, value) != 0;
    else throw InvalidArgument("core", "learner spec: unknown key '" + std::string(key) + "'");
  }
  return spec;
}

double cv_risk(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const FoldAssignment& folds, Loss loss, TargetKind kind) {
  if (folds.size() != x.rows() || y.size() != x.rows())
    throw InvalidArgument("core", "cv_risk: folds/target do not match feature rows");
  std::vector<double> fold_loss(static_cast<std::size_t>(folds.folds), 0.0);
  parallel_for(fold_loss.size(), [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    const auto train = folds.training_rows(fold);
    const auto test = folds.holdout_rows(fold);
    ModelPtr model;
    try {
      model = fit_learner(spec, take_rows(x, train), take(y, train), kind);
    } catch (const std::exception& e) {
      throw FitError("core", "cv_risk: fit failed in fold " + std::to_string(fold + 1) + ": " + e.what());
    }
    fold_loss[f] = evaluate_loss(loss, model->predict(take_rows(x, test)), take(y, test));
  });
  double total = 0.0;
  for (double l : fold_loss) total += l;
  return total / static_cast<double>(fold_loss.size());
}

}  // namespace ateml
