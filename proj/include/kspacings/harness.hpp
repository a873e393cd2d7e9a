#pragma once

// Monte Carlo experiments over a bandwidth regime: replicate loops, summaries
// and CSV / JSONL persistence.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kspacings/regimes.hpp"

namespace kspacings {

inline constexpr double kDefaultBudgetCap = 1e9;

struct EmitSet {
  bool records = true;
  bool summary = true;
  bool conditions = true;
};

struct ExperimentConfig {
  RegimeSpec regime;
  std::vector<std::uint64_t> n_grid;
  std::uint32_t replicates = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir = ".";
  EmitSet emit;
  /// Bound on sum over the grid of N k replicates. Not a config file key.
  double budget_cap = kDefaultBudgetCap;

  /// Throws ConfigError or PreconditionError.
  void validate() const;
};

/// Parses a config document. Keys: regime, c, c_schedule, k_mode ("fixed" or
/// "grow"), k, k_rule, delta, n_grid, replicates, base_seed, out_dir, emit.
/// Unknown keys are rejected.
[[nodiscard]] ExperimentConfig parse_config(const std::string& json_text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct ReplicateRecord {
  Variant regime = Variant::I;
  std::uint64_t n_spacings = 0;
  std::uint32_t k = 0;
  std::uint64_t n = 0;
  double a_n = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;
  double mu = 0.0;
  double lambda = 0.0;
  std::optional<double> k_n;
  double theta = 0.0;
  std::optional<double> d_scaled;  ///< d_N Lambda, variant IV only
  LimitTarget::Kind target_kind = LimitTarget::Kind::point;
  double target_lo = 0.0;
  double target_hi = 0.0;

  bool operator==(const ReplicateRecord&) const = default;
};

struct SummaryRow {
  Variant regime = Variant::I;
  std::uint64_t n_spacings = 0;
  std::size_t count = 0;
  std::size_t undefined_count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double target_lo = 0.0;
  double target_hi = 0.0;
  /// |median - target| for a point target, otherwise the fraction of values
  /// in [lo - 0.25, hi + 0.25] (interval) or at most the bound (upper bound).
  double gap_or_coverage = 0.0;
};

struct RunOptions {
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

struct ExperimentResult {
  std::vector<ReplicateRecord> records;  ///< ordered by (N, replicate)
  std::vector<ConditionReport> conditions;
};

[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config,
                                              RunOptions options = {});

/// Hazen quantile (position n p + 1/2 on the sorted sample, linear in between).
[[nodiscard]] double hazen_quantile(std::vector<double> values, double p);

/// Groups by (regime, N). Summarizes k_n, or d_N Lambda for variant IV.
[[nodiscard]] std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records);

[[nodiscard]] std::string records_csv(const std::vector<ReplicateRecord>& records);
[[nodiscard]] std::string records_jsonl(const std::vector<ReplicateRecord>& records);
[[nodiscard]] std::string summary_csv(const std::vector<SummaryRow>& rows);
[[nodiscard]] std::string summary_jsonl(const std::vector<SummaryRow>& rows);
/// Long format: one row per (condition, N).
[[nodiscard]] std::string conditions_csv(const std::vector<ConditionReport>& reports);

[[nodiscard]] std::vector<ReplicateRecord> parse_records_csv(const std::string& text);
[[nodiscard]] std::vector<ReplicateRecord> parse_records_jsonl(const std::string& text);
[[nodiscard]] std::vector<SummaryRow> parse_summary_csv(const std::string& text);

/// Writes text to path; IoError names the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

/// Writes records.csv, records.jsonl, summary.csv and conditions.csv into
/// out_dir according to config.emit. Returns the files written.
std::vector<std::filesystem::path> persist(const ExperimentConfig& config,
                                           const ExperimentResult& result);

}  // namespace kspacings
