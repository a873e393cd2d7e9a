#include "kspacings/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kspacings/empirical_modulus.hpp"
#include "kspacings/errors.hpp"
#include "kspacings/spacings_lab.hpp"

namespace kspacings {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCoverageSlack = 0.25;

constexpr const char* kRecordHeader =
    "regime,N,k,n,a_N,seed,replicate,mu,lambda,k_n,theta,d_scaled,target_kind,target_lo,"
    "target_hi";
constexpr const char* kSummaryHeader =
    "regime,N,count,undefined_count,mean,sd,median,q05,q95,target_lo,target_hi,gap_or_coverage";

std::string num(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(const std::optional<double>& x) { return x ? num(*x) : "NA"; }

std::string json_num(double x) { return std::isfinite(x) ? num(x) : "null"; }
std::string json_num(const std::optional<double>& x) { return x ? json_num(*x) : "null"; }

std::string quoted(std::string_view s) { return json(std::string(s)).dump(); }

LimitTarget::Kind parse_kind(std::string_view text) {
  if (text == "point") return LimitTarget::Kind::point;
  if (text == "interval") return LimitTarget::Kind::interval;
  if (text == "upper-bound") return LimitTarget::Kind::upper_bound;
  throw ConfigError("unknown target kind '" + std::string(text) + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::string_view header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ConfigError("CSV header mismatch: expected '" + std::string(header) + "'");
  }
  const std::size_t width = split_csv_line(std::string(header)).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != width) throw ConfigError("CSV row has wrong number of cells: " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell_double(const std::string& s) {
  if (s == "NA") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("bad number '" + s + "'");
  return v;
}

std::optional<double> cell_optional(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return cell_double(s);
}

std::uint64_t cell_u64(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw ConfigError("bad integer '" + s + "'");
  return v;
}

std::optional<double> json_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

template <class T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: key '") + key + "' has the wrong type");
  }
}

ReplicateRecord run_replicate(const ExperimentConfig& config, const LimitTarget& target,
                              std::uint64_t big_n, std::uint32_t replicate) {
  const RegimeSpec& spec = config.regime;
  const std::uint32_t k = k_for(spec, big_n);
  const double a = bandwidth(spec, big_n);
  const SpacingsSample sample = sample_spacings(k, static_cast<std::int64_t>(big_n),
                                                config.base_seed, replicate);
  UniformizedSample u = uniformize(sample);
  const ModulusReport report = oscillation_modulus(EmpiricalPath::from_sorted(std::move(u.w)), a);

  ReplicateRecord r;
  r.regime = spec.variant;
  r.n_spacings = big_n;
  r.k = k;
  r.n = sample.n;
  r.a_n = a;
  r.seed = config.base_seed;
  r.replicate = replicate;
  r.mu = sample.mu;
  r.lambda = report.lambda;
  r.k_n = report.k_n;
  r.theta = report.theta;
  if (spec.variant == Variant::IV) {
    r.d_scaled = d_scaling(big_n, c_sequence(spec, big_n)) * report.lambda;
  }
  r.target_kind = target.kind;
  r.target_lo = target.lo;
  r.target_hi = target.hi;
  return r;
}

}  // namespace

void ExperimentConfig::validate() const {
  regime.validate();
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (n_grid.empty()) throw ConfigError("config: n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 3) throw ConfigError("config: every N must be >= 3");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw ConfigError("config: n_grid must be strictly ascending");
    }
  }
  double budget = 0.0;
  for (std::uint64_t big_n : n_grid) {
    budget += static_cast<double>(big_n) * k_for(regime, big_n) * replicates;
  }
  if (budget > budget_cap) {
    std::ostringstream msg;
    msg << "experiment budget sum N*k*replicates = " << budget << " exceeds the cap "
        << budget_cap;
    throw ResourceError(msg.str());
  }
  // Surfaces bandwidth and regime-gate violations before any sampling.
  for (std::uint64_t big_n : n_grid) (void)bandwidth(regime, big_n);
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  static const char* const known[] = {"regime",    "c",         "c_schedule", "k_mode",
                                      "k",         "k_rule",    "delta",      "n_grid",
                                      "replicates", "base_seed", "out_dir",    "emit"};
  for (const auto& item : doc.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return item.key() == k; }) == std::end(known)) {
      throw ConfigError("config: unknown key '" + item.key() + "'");
    }
  }

  ExperimentConfig cfg;
  cfg.regime.variant = parse_variant(require<std::string>(doc, "regime"));
  cfg.regime.c = require<double>(doc, "c");
  if (doc.contains("c_schedule")) cfg.regime.c_schedule = require<std::string>(doc, "c_schedule");
  if (doc.contains("delta") && !doc.at("delta").is_null()) cfg.regime.delta = require<double>(doc, "delta");

  const std::string k_mode = doc.contains("k_mode") ? require<std::string>(doc, "k_mode") : "fixed";
  if (k_mode == "fixed") {
    const auto k = require<std::int64_t>(doc, "k");
    if (k < 1 || k > 1'000'000) throw ConfigError("config: k must lie in [1, 1e6]");
    cfg.regime.k_mode = KMode::fixed(static_cast<std::uint32_t>(k));
    if (doc.contains("k_rule")) throw ConfigError("config: k_rule only applies to k_mode 'grow'");
  } else if (k_mode == "grow") {
    if (doc.contains("k")) throw ConfigError("config: k only applies to k_mode 'fixed'");
    cfg.regime.k_mode = KMode::grow(doc.contains("k_rule") ? require<std::string>(doc, "k_rule")
                                                           : std::string("loglog"));
  } else {
    throw ConfigError("config: k_mode must be 'fixed' or 'grow'");
  }

  cfg.n_grid = require<std::vector<std::uint64_t>>(doc, "n_grid");
  const auto replicates = require<std::int64_t>(doc, "replicates");
  if (replicates < 1 || replicates > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("config: replicates must be a positive integer");
  }
  cfg.replicates = static_cast<std::uint32_t>(replicates);
  cfg.base_seed = require<std::uint64_t>(doc, "base_seed");
  if (doc.contains("out_dir")) cfg.out_dir = require<std::string>(doc, "out_dir");
  if (doc.contains("emit")) {
    cfg.emit = EmitSet{false, false, false};
    for (const std::string& e : require<std::vector<std::string>>(doc, "emit")) {
      if (e == "records") {
        cfg.emit.records = true;
      } else if (e == "summary") {
        cfg.emit.summary = true;
      } else if (e == "conditions") {
        cfg.emit.conditions = true;
      } else {
        throw ConfigError("config: unknown emit entry '" + e + "'");
      }
    }
  }
  try {
    cfg.regime.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path));
}

ExperimentResult run_experiment(const ExperimentConfig& config, RunOptions options) {
  config.validate();
  ExperimentResult result;

  std::vector<std::uint64_t> condition_grid;
  for (std::uint64_t big_n : config.n_grid) {
    if (big_n >= 16) condition_grid.push_back(big_n);
  }
  result.conditions = check_conditions(config.regime, condition_grid);

  const LimitTarget target = limit_target(config.regime);
  const std::size_t total = config.n_grid.size() * config.replicates;
  result.records.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      try {
        const std::uint64_t big_n = config.n_grid[idx / config.replicates];
        const auto replicate = static_cast<std::uint32_t>(idx % config.replicates);
        result.records[idx] = run_replicate(config, target, big_n, replicate);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

double hazen_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("hazen_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("hazen_quantile: p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double pos = std::clamp(n * p + 0.5, 1.0, n);  // 1-based
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo >= values.size()) return values.back();
  return values[lo - 1] + frac * (values[lo] - values[lo - 1]);
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records) {
  if (records.empty()) throw DomainError("summarize: no records");
  std::map<std::pair<int, std::uint64_t>, std::vector<const ReplicateRecord*>> groups;
  for (const ReplicateRecord& r : records) {
    groups[{static_cast<int>(r.regime), r.n_spacings}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    const ReplicateRecord& first = *members.front();
    SummaryRow row;
    row.regime = first.regime;
    row.n_spacings = first.n_spacings;
    row.target_lo = first.target_lo;
    row.target_hi = first.target_hi;
    std::vector<double> values;
    for (const ReplicateRecord* r : members) {
      const auto v = r->regime == Variant::IV ? r->d_scaled : r->k_n;
      if (v && std::isfinite(*v)) {
        values.push_back(*v);
      } else {
        ++row.undefined_count;
      }
    }
    row.count = values.size();
    if (values.empty()) {
      row.mean = row.sd = row.median = row.q05 = row.q95 = row.gap_or_coverage = kNaN;
      rows.push_back(row);
      continue;
    }
    const double n = static_cast<double>(values.size());
    row.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    row.median = hazen_quantile(values, 0.5);
    row.q05 = hazen_quantile(values, 0.05);
    row.q95 = hazen_quantile(values, 0.95);
    switch (first.target_kind) {
      case LimitTarget::Kind::point:
        row.gap_or_coverage = std::abs(row.median - first.target_lo);
        break;
      case LimitTarget::Kind::interval:
        row.gap_or_coverage =
            static_cast<double>(std::count_if(values.begin(), values.end(), [&](double v) {
              return v >= first.target_lo - kCoverageSlack && v <= first.target_hi + kCoverageSlack;
            })) / n;
        break;
      case LimitTarget::Kind::upper_bound:
        row.gap_or_coverage =
            static_cast<double>(std::count_if(values.begin(), values.end(),
                                              [&](double v) { return v <= first.target_hi; })) /
            n;
        break;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string records_csv(const std::vector<ReplicateRecord>& records) {
  std::string out = std::string(kRecordHeader) + "\n";
  for (const ReplicateRecord& r : records) {
    out += std::string(to_string(r.regime)) + "," + std::to_string(r.n_spacings) + "," +
           std::to_string(r.k) + "," + std::to_string(r.n) + "," + num(r.a_n) + "," +
           std::to_string(r.seed) + "," + std::to_string(r.replicate) + "," + num(r.mu) + "," +
           num(r.lambda) + "," + num(r.k_n) + "," + num(r.theta) + "," + num(r.d_scaled) + "," +
           std::string(to_string(r.target_kind)) + "," + num(r.target_lo) + "," +
           num(r.target_hi) + "\n";
  }
  return out;
}

std::string records_jsonl(const std::vector<ReplicateRecord>& records) {
  std::string out;
  for (const ReplicateRecord& r : records) {
    out += "{\"regime\":" + quoted(to_string(r.regime)) +
           ",\"N\":" + std::to_string(r.n_spacings) + ",\"k\":" + std::to_string(r.k) +
           ",\"n\":" + std::to_string(r.n) + ",\"a_N\":" + json_num(r.a_n) +
           ",\"seed\":" + std::to_string(r.seed) + ",\"replicate\":" + std::to_string(r.replicate) +
           ",\"mu\":" + json_num(r.mu) + ",\"lambda\":" + json_num(r.lambda) +
           ",\"k_n\":" + json_num(r.k_n) + ",\"theta\":" + json_num(r.theta) +
           ",\"d_scaled\":" + json_num(r.d_scaled) +
           ",\"target_kind\":" + quoted(to_string(r.target_kind)) +
           ",\"target_lo\":" + json_num(r.target_lo) + ",\"target_hi\":" + json_num(r.target_hi) +
           "}\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const SummaryRow& s : rows) {
    out += std::string(to_string(s.regime)) + "," + std::to_string(s.n_spacings) + "," +
           std::to_string(s.count) + "," + std::to_string(s.undefined_count) + "," + num(s.mean) +
           "," + num(s.sd) + "," + num(s.median) + "," + num(s.q05) + "," + num(s.q95) + "," +
           num(s.target_lo) + "," + num(s.target_hi) + "," + num(s.gap_or_coverage) + "\n";
  }
  return out;
}

std::string summary_jsonl(const std::vector<SummaryRow>& rows) {
  std::string out;
  for (const SummaryRow& s : rows) {
    out += "{\"regime\":" + quoted(to_string(s.regime)) +
           ",\"N\":" + std::to_string(s.n_spacings) + ",\"count\":" + std::to_string(s.count) +
           ",\"undefined_count\":" + std::to_string(s.undefined_count) +
           ",\"mean\":" + json_num(s.mean) + ",\"sd\":" + json_num(s.sd) +
           ",\"median\":" + json_num(s.median) + ",\"q05\":" + json_num(s.q05) +
           ",\"q95\":" + json_num(s.q95) + ",\"target_lo\":" + json_num(s.target_lo) +
           ",\"target_hi\":" + json_num(s.target_hi) +
           ",\"gap_or_coverage\":" + json_num(s.gap_or_coverage) + "}\n";
  }
  return out;
}

std::string conditions_csv(const std::vector<ConditionReport>& reports) {
  std::string out = "id,N,value,extra,required,applicable,verdict,slope\n";
  for (const ConditionReport& r : reports) {
    for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
      out += r.id + "," + std::to_string(r.n_grid[i]) + "," + num(r.values[i]) + "," +
             (i < r.extra.size() ? num(r.extra[i]) : std::string("NA")) + "," +
             std::string(to_string(r.required)) + "," + (r.applicable ? "true" : "false") + "," +
             std::string(to_string(r.verdict)) + "," + num(r.slope) + "\n";
    }
  }
  return out;
}

std::vector<ReplicateRecord> parse_records_csv(const std::string& text) {
  std::vector<ReplicateRecord> out;
  for (const auto& c : csv_rows(text, kRecordHeader)) {
    ReplicateRecord r;
    r.regime = parse_variant(c[0]);
    r.n_spacings = cell_u64(c[1]);
    r.k = static_cast<std::uint32_t>(cell_u64(c[2]));
    r.n = cell_u64(c[3]);
    r.a_n = cell_double(c[4]);
    r.seed = cell_u64(c[5]);
    r.replicate = static_cast<std::uint32_t>(cell_u64(c[6]));
    r.mu = cell_double(c[7]);
    r.lambda = cell_double(c[8]);
    r.k_n = cell_optional(c[9]);
    r.theta = cell_double(c[10]);
    r.d_scaled = cell_optional(c[11]);
    r.target_kind = parse_kind(c[12]);
    r.target_lo = cell_double(c[13]);
    r.target_hi = cell_double(c[14]);
    out.push_back(r);
  }
  return out;
}

std::vector<ReplicateRecord> parse_records_jsonl(const std::string& text) {
  std::vector<ReplicateRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ReplicateRecord r;
    r.regime = parse_variant(j.at("regime").get<std::string>());
    r.n_spacings = j.at("N").get<std::uint64_t>();
    r.k = j.at("k").get<std::uint32_t>();
    r.n = j.at("n").get<std::uint64_t>();
    r.a_n = j.at("a_N").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.replicate = j.at("replicate").get<std::uint32_t>();
    r.mu = j.at("mu").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.k_n = json_optional(j.at("k_n"));
    r.theta = j.at("theta").get<double>();
    r.d_scaled = json_optional(j.at("d_scaled"));
    r.target_kind = parse_kind(j.at("target_kind").get<std::string>());
    r.target_lo = j.at("target_lo").get<double>();
    r.target_hi = j.at("target_hi").get<double>();
    out.push_back(r);
  }
  return out;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::vector<SummaryRow> out;
  for (const auto& c : csv_rows(text, kSummaryHeader)) {
    SummaryRow s;
    s.regime = parse_variant(c[0]);
    s.n_spacings = cell_u64(c[1]);
    s.count = cell_u64(c[2]);
    s.undefined_count = cell_u64(c[3]);
    s.mean = cell_double(c[4]);
    s.sd = cell_double(c[5]);
    s.median = cell_double(c[6]);
    s.q05 = cell_double(c[7]);
    s.q95 = cell_double(c[8]);
    s.target_lo = cell_double(c[9]);
    s.target_hi = cell_double(c[10]);
    s.gap_or_coverage = cell_double(c[11]);
    out.push_back(s);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::filesystem::path> persist(const ExperimentConfig& config,
                                           const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + config.out_dir.string() + "': " +
                  ec.message());
  }
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    const auto path = config.out_dir / name;
    write_text(path, text);
    written.push_back(path);
  };
  if (config.emit.records) {
    emit("records.csv", records_csv(result.records));
    emit("records.jsonl", records_jsonl(result.records));
  }
  if (config.emit.summary && !result.records.empty()) {
    const auto rows = summarize(result.records);
    emit("summary.csv", summary_csv(rows));
    emit("summary.jsonl", summary_jsonl(rows));
  }
  if (config.emit.conditions) emit("conditions.csv", conditions_csv(result.conditions));
  return written;
}

}  // namespace kspacings
