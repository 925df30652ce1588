#pragma once

#include "stablesep/citest.hpp"
#include "stablesep/dataset.hpp"
#include "stablesep/eval.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stablesep::cli {

enum class Mode { Synthetic, Real };

std::vector<double> default_r_test_grid();

// Ordered label -> group keys.
using GroupAssignment = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct ExperimentConfig {
  Mode mode = Mode::Synthetic;

  // synthetic
  std::size_t n = 2000;
  std::size_t p = 10;
  double r_train = 2.0;
  std::vector<double> r_test = default_r_test_grid();
  std::size_t seed_count = 10;
  std::optional<std::size_t> k;  // default round(0.3 p)

  CiMethod ci_method = CiMethod::FisherZ;
  // "auto" (discover from data), a column index, or a column name. Synthetic
  // runs default to column 0, which is always a true cause.
  std::string seed_variable = "0";
  RcitParams rcit;

  // real
  std::filesystem::path input_path;
  std::string response_column;
  std::string group_column;
  GroupAssignment group_assignment;  // empty: default split
  std::vector<std::string> exclude_columns;

  std::filesystem::path output_dir = "out";
  std::uint64_t rng_seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t effective_k() const;
  /// Resolve seed_variable against column names; nullopt means auto.
  std::optional<std::size_t> resolve_seed(const std::vector<std::string>& names) const;
  void validate() const;
  /// key = value lines, in a fixed order; parse_config(echo()) round-trips.
  std::string echo() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` text. Blank lines and lines starting with '#' are ignored.
KeyValues parse_key_values(std::istream& in);

/// Apply key/value overrides onto `base`. Unknown keys are rejected.
ExperimentConfig apply_overrides(ExperimentConfig base, const KeyValues& kv);

GroupAssignment parse_group_assignment(const std::string& text);
std::string format_group_assignment(const GroupAssignment& g);

struct CsvTable {
  Dataset data;
  std::vector<std::string> group_keys;  // empty when no group column
};

/// Comma-delimited file with a header row. Every column other than the
/// response, the group column and `exclude` becomes a predictor.
CsvTable load_csv(const std::filesystem::path& path, const std::string& response_column,
                  const std::optional<std::string>& group_column,
                  const std::vector<std::string>& exclude = {});
CsvTable read_csv(std::istream& in, const std::string& response_column,
                  const std::optional<std::string>& group_column,
                  const std::vector<std::string>& exclude = {});

/// CSV export; roles go into a leading `# roles:` comment line.
void write_dataset_csv(std::ostream& out, const Dataset& d, const std::string& response_name = "y");

struct MethodCell {
  std::size_t seed_index = 0;
  std::string method;
  std::vector<std::size_t> selected;
  EvaluationReport report;
};

struct SyntheticRun {
  std::vector<MethodCell> cells;  // seed-major, method order fixed
  std::vector<std::string> methods;
  std::vector<std::filesystem::path> files;
};

SyntheticRun run_synthetic(const ExperimentConfig& cfg);

/// Sort keys ascending (numerically when all keys are integers); the first
/// half goes to G1 and the rest into three contiguous blocks G2..G4.
GroupAssignment default_group_assignment(std::vector<std::string> keys);

/// Row indices per group label. Rejects keys listed under two labels and
/// labels that match no rows.
std::vector<std::pair<std::string, std::vector<std::size_t>>> partition_groups(
    const std::vector<std::string>& row_keys, const GroupAssignment& assignment);

struct RealCurvePoint {
  std::string method;
  std::size_t k = 0;
  std::string group;
  double rmse = 0.0;
};

struct RealRun {
  std::vector<std::pair<std::string, std::size_t>> group_rows;  // label, row count
  std::map<std::string, VariableRanking> rankings;
  std::vector<RealCurvePoint> curve;
  std::vector<std::filesystem::path> files;

  double rmse_at(const std::string& method, std::size_t k, const std::string& group) const;
};

RealRun run_real(const ExperimentConfig& cfg);

}  // namespace stablesep::cli
