#include "ateml/ateml.h"

#include "ateml/app/commands.hpp"
#include "ateml/core/error.hpp"
#include "ateml/core/parallel.hpp"

#include <json.hpp>

#include <cstring>
#include <sstream>

struct ateml_dataset {
  ateml::Dataset data;
  ateml::Index total_rows;
  ateml::Index dropped_rows;
};

struct ateml_result {
  ateml::RunReport report;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_json;

void clear_error() {
  g_error.clear();
  g_error_json.clear();
}

ateml_status fail(ateml_status status, const std::string& module, const std::string& message) {
  g_error = module.empty() ? message : module + ": " + message;
  static const char* names[] = {"ok", "invalid_argument", "fit", "numeric", "io", "internal"};
  nlohmann::ordered_json j;
  j["status"] = names[status];
  j["code"] = static_cast<int>(status);
  j["module"] = module;
  j["message"] = message;
  g_error_json = j.dump();
  return status;
}

ateml_status status_of(ateml::ErrorKind kind) {
  switch (kind) {
    case ateml::ErrorKind::invalid_argument: return ATEML_ERR_INVALID_ARGUMENT;
    case ateml::ErrorKind::fit: return ATEML_ERR_FIT;
    case ateml::ErrorKind::numeric: return ATEML_ERR_NUMERIC;
    case ateml::ErrorKind::io: return ATEML_ERR_IO;
    case ateml::ErrorKind::internal: return ATEML_ERR_INTERNAL;
  }
  return ATEML_ERR_INTERNAL;
}

template <class F>
ateml_status guarded(F&& f) {
  clear_error();
  try {
    f();
    return ATEML_OK;
  } catch (const ateml::Error& e) {
    return fail(status_of(e.kind()), e.module(), e.detail());
  } catch (const std::bad_alloc&) {
    return fail(ATEML_ERR_INTERNAL, "", "out of memory");
  } catch (const std::exception& e) {
    return fail(ATEML_ERR_INTERNAL, "", e.what());
  } catch (...) {
    return fail(ATEML_ERR_INTERNAL, "", "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw ateml::InvalidArgument("capi", std::string(what) + " must not be null");
}

ateml::RunConfig parse_config(const char* text) {
  return ateml::parse_run_config(text ? text : "");
}

}  // namespace

extern "C" {

const char* ateml_version(void) { return "1.0.0"; }

const char* ateml_last_error(void) { return g_error.c_str(); }

const char* ateml_last_error_json(void) { return g_error_json.c_str(); }

ateml_status ateml_set_threads(int threads) {
  return guarded([&] {
    if (threads < 0) throw ateml::InvalidArgument("capi", "thread count must be >= 0");
    ateml::set_thread_count(threads);
  });
}

ateml_status ateml_dataset_create(const double* x, const char* const* names, const double* treatment,
                                  const double* outcome, size_t n, size_t d, ateml_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    require(treatment, "treatment");
    require(outcome, "outcome");
    if (d > 0) require(x, "x");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = x[i * cols + j];
    std::vector<std::string> labels;
    if (names) {
      for (size_t j = 0; j < d; ++j) {
        require(names[j], "covariate name");
        labels.emplace_back(names[j]);
      }
    } else {
      labels = ateml::default_names(cols);
    }
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(treatment, rows);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(outcome, rows);
    bool binary = true;
    for (Eigen::Index i = 0; i < rows; ++i)
      if (y[i] != 0.0 && y[i] != 1.0) binary = false;
    auto data = binary ? ateml::Dataset(std::move(m), std::move(labels), std::move(a), std::move(y))
                       : ateml::Dataset::with_observed_bounds(std::move(m), std::move(labels), std::move(a),
                                                              std::move(y));
    *out = new ateml_dataset{std::move(data), rows, 0};
  });
}

ateml_status ateml_dataset_from_csv(const char* path, const char* treatment, const char* outcome,
                                    const char* covariates, ateml_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    require(path, "path");
    ateml::IngestSpec spec;
    if (treatment) spec.treatment = treatment;
    if (outcome) spec.outcome = outcome;
    spec.covariates = split_list(covariates);
    auto in = ateml::ingest_csv(path, spec);
    *out = new ateml_dataset{std::move(in.data), in.total_rows, in.dropped_rows};
  });
}

size_t ateml_dataset_rows(const ateml_dataset* data) { return data ? static_cast<size_t>(data->data.rows()) : 0; }

size_t ateml_dataset_cols(const ateml_dataset* data) { return data ? static_cast<size_t>(data->data.cols()) : 0; }

void ateml_dataset_free(ateml_dataset* data) { delete data; }

ateml_status ateml_estimate(const ateml_dataset* data, const char* config, ateml_result** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    require(data, "data");
    const ateml::RunConfig c = parse_config(config);
    auto report = ateml::run_on_dataset(c, data->data, data->total_rows, data->dropped_rows);
    *out = new ateml_result{std::move(report)};
  });
}

double ateml_result_estimate(const ateml_result* r) { return r ? r->report.estimate : std::nan(""); }
double ateml_result_se(const ateml_result* r) { return r ? r->report.se : std::nan(""); }
double ateml_result_ci_lo(const ateml_result* r) { return r ? r->report.ci_lo : std::nan(""); }
double ateml_result_ci_hi(const ateml_result* r) { return r ? r->report.ci_hi : std::nan(""); }
const char* ateml_result_method(const ateml_result* r) { return r ? r->report.method.c_str() : ""; }

ateml_status ateml_result_report(const ateml_result* r, char** json) {
  return guarded([&] {
    require(r, "result");
    require(json, "json");
    *json = copy_string(r->report.to_json(false));
  });
}

void ateml_result_free(ateml_result* r) { delete r; }

ateml_status ateml_run(const char* config, char** report_json, char** summary) {
  if (report_json) *report_json = nullptr;
  if (summary) *summary = nullptr;
  return guarded([&] {
    const ateml::RunReport r = ateml::run(parse_config(config));
    if (report_json) *report_json = copy_string(r.to_json());
    if (summary) *summary = copy_string(r.summary_line());
  });
}

ateml_status ateml_balance(const char* config, const char* adjustments, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    *csv = nullptr;
    *csv = copy_string(ateml::balance_cmd(parse_config(config), split_list(adjustments)));
  });
}

ateml_status ateml_simulate(const char* spec, const char* estimators, int replications, uint64_t seed,
                            const char* config, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    *csv = nullptr;
    require(spec, "spec");
    *csv = copy_string(ateml::simulate_cmd(spec, split_list(estimators), replications, seed, parse_config(config)));
  });
}

ateml_status ateml_export_dgp(const char* spec, uint64_t seed, int64_t n, char** csv) {
  return guarded([&] {
    require(csv, "csv");
    *csv = nullptr;
    require(spec, "spec");
    if (n < 0) throw ateml::InvalidArgument("capi", "n must be >= 0");
    *csv = copy_string(ateml::export_dgp(spec, seed, static_cast<ateml::Index>(n)));
  });
}

ateml_status ateml_dgp_catalog(char** names) {
  return guarded([&] {
    require(names, "names");
    std::string out;
    for (const auto& s : ateml::builtin_specs()) out += (out.empty() ? "" : ",") + s.name;
    *names = copy_string(out);
  });
}

ateml_status ateml_normalize_config(const char* config, char** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = copy_string(ateml::serialize_run_config(parse_config(config)));
  });
}

void ateml_string_free(char* s) { std::free(s); }

}  // extern "C"
