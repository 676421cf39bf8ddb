#pragma once

#include "ateml/core/dataset.hpp"

#include <string>
#include <vector>

namespace ateml {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

struct IngestSpec {
  std::string treatment = "A";
  std::string outcome = "Y";
  std::vector<std::string> covariates;  // empty = every other column
};

struct IngestResult {
  Dataset data;
  Index total_rows = 0;
  Index dropped_rows = 0;
};

constexpr double kMaxDropFraction = 0.5;

// Complete-case ingestion: rows with a missing or unparseable selected cell
// are dropped and counted. An outcome taking only the values 0 and 1 is
// binary; anything else is bounded continuous with its observed range.
IngestResult ingest_table(const CsvTable& table, const IngestSpec& spec);
IngestResult ingest_csv(const std::string& path, const IngestSpec& spec);

std::string dataset_to_csv(const Dataset& data, const std::string& treatment = "A",
                           const std::string& outcome = "Y");

std::string read_text_file(const std::string& path);
// Writes through a temporary file and a rename.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ateml
