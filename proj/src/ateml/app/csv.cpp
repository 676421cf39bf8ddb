#include "ateml/app/csv.hpp"

#include "ateml/core/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ateml {
namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw IoError("cli", "csv line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cell));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string format_cell(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!have_header) {
      if (trim(line).empty()) continue;
      for (auto& h : split_line(line, line_no)) table.header.push_back(trim(h));
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line, line_no);
    if (cells.size() != table.header.size())
      throw IoError("cli", "csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, found " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError("cli", "csv: missing header row");
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cli", "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cli", "cannot write '" + path + "'");
    out << text;
    if (!out.flush()) throw IoError("cli", "cannot write '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cli", "cannot write '" + path + "'");
  }
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

IngestResult ingest_table(const CsvTable& table, const IngestSpec& spec) {
  const auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw InvalidArgument("cli", "column '" + name + "' not found in the data");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t t_col = column(spec.treatment);
  const std::size_t y_col = column(spec.outcome);
  if (t_col == y_col) throw InvalidArgument("cli", "treatment and outcome must be different columns");
  std::vector<std::size_t> x_cols;
  std::vector<std::string> names;
  if (spec.covariates.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (c != t_col && c != y_col) {
        x_cols.push_back(c);
        names.push_back(table.header[c]);
      }
  } else {
    for (const auto& name : spec.covariates) {
      const std::size_t c = column(name);
      if (c == t_col || c == y_col)
        throw InvalidArgument("cli", "covariate '" + name + "' is also the treatment or outcome");
      x_cols.push_back(c);
      names.push_back(name);
    }
  }
  if (x_cols.empty()) throw InvalidArgument("cli", "no covariate columns selected");

  std::vector<std::array<double, 2>> ay;
  std::vector<std::vector<double>> xs;
  Index dropped = 0;
  for (const auto& row : table.rows) {
    double a = 0.0, y = 0.0;
    std::vector<double> x(x_cols.size());
    bool ok = parse_number(row[t_col], a) && parse_number(row[y_col], y);
    for (std::size_t j = 0; ok && j < x_cols.size(); ++j) ok = parse_number(row[x_cols[j]], x[j]);
    if (!ok) {
      ++dropped;
      continue;
    }
    if (a != 0.0 && a != 1.0) {
      std::ostringstream os;
      os << "treatment column '" << spec.treatment << "' must be 0/1, found " << a;
      throw InvalidArgument("cli", os.str());
    }
    ay.push_back({a, y});
    xs.push_back(std::move(x));
  }
  const Index total = static_cast<Index>(table.rows.size());
  if (ay.empty()) throw InvalidArgument("cli", "no complete rows remain after dropping missing values");
  if (static_cast<double>(dropped) > kMaxDropFraction * static_cast<double>(total))
    throw InvalidArgument("cli", std::to_string(dropped) + " of " + std::to_string(total) +
                                     " rows have missing values (more than 50%), refusing to continue");

  const Index n = static_cast<Index>(ay.size());
  const Index d = static_cast<Index>(x_cols.size());
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd a(n), y(n);
  bool binary = true;
  for (Index i = 0; i < n; ++i) {
    a[i] = ay[static_cast<std::size_t>(i)][0];
    y[i] = ay[static_cast<std::size_t>(i)][1];
    if (y[i] != 0.0 && y[i] != 1.0) binary = false;
    for (Index j = 0; j < d; ++j) x(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  IngestResult out{binary ? Dataset(std::move(x), std::move(names), std::move(a), std::move(y))
                          : Dataset::with_observed_bounds(std::move(x), std::move(names), std::move(a), std::move(y)),
                   total, dropped};
  return out;
}

IngestResult ingest_csv(const std::string& path, const IngestSpec& spec) { return ingest_table(read_csv(path), spec); }

std::string dataset_to_csv(const Dataset& data, const std::string& treatment, const std::string& outcome) {
  std::string out;
  for (const auto& name : data.names()) out += name + ",";
  out += treatment + "," + outcome + "\n";
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) out += format_cell(data.covariates()(i, j)) + ",";
    out += format_cell(data.treatment()[i]) + "," + format_cell(data.outcome()[i]) + "\n";
  }
  return out;
}

}  // namespace ateml
