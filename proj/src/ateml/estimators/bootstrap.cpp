#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"
#include "ateml/core/rng.hpp"
#include "ateml/core/stats.hpp"
#include "ateml/estimators/estimators.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace ateml {

BootstrapResult bootstrap_ci(const EstimatorClosure& estimator, const Dataset& data, int replicates,
                             std::uint64_t seed) {
  if (replicates < 100) throw InvalidArgument("estimators", "bootstrap: B must be at least 100");
  const Index n = data.rows();
  const Rng root(seed, 0x626f6f74ULL);
  std::vector<std::optional<double>> values(static_cast<std::size_t>(replicates));
  std::vector<std::string> reasons(values.size());
  parallel_for(values.size(), [&](std::size_t b) {
    Rng rng = root.split(b);
    std::vector<Index> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    try {
      const double v = estimator(data.subset_rows(rows));
      if (!std::isfinite(v)) throw NumericError("estimators", "non-finite bootstrap estimate");
      values[b] = v;
    } catch (const std::exception& e) {
      reasons[b] = e.what();
    }
  });

  BootstrapResult out;
  std::map<std::string, int> why;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (values[b]) out.estimates.push_back(*values[b]);
    else {
      ++out.failures;
      ++why[reasons[b]];
    }
  }
  if (out.failures * 10 > replicates) {
    std::ostringstream os;
    os << "bootstrap: " << out.failures << " of " << replicates << " resamples failed";
    for (const auto& [reason, count] : why) os << "; " << count << "x " << reason;
    throw FitError("estimators", os.str());
  }
  out.se = out.estimates.size() >= 2 ? sample_sd(out.estimates) : 0.0;
  out.ci_lo = quantile(out.estimates, 0.025);
  out.ci_hi = quantile(out.estimates, 0.975);
  return out;
}

void attach_bootstrap(AteResult& result, const BootstrapResult& boot) {
  result.se = boot.se;
  result.ci_lo = boot.ci_lo;
  result.ci_hi = boot.ci_hi;
  result.se_kind = SeKind::bootstrap;
  result.diagnostics.emplace_back("bootstrap_replicates", static_cast<double>(boot.estimates.size()));
  result.diagnostics.emplace_back("bootstrap_failures", static_cast<double>(boot.failures));
}

}  // namespace ateml
