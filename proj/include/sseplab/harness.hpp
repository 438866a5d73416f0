#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sseplab {

inline constexpr int kConfigSchemaVersion = 1;

enum class Mode { Profile, Correlations, Stationary, Fluctuations, Bounds, Verify, Spectrum };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode m);

// Names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Tolerances {
  double abs = 1e-9;      // deterministic comparisons
  double z_score = 4.0;   // Monte Carlo comparisons, in standard errors
  double slope = 0.3;     // fitted exponents
};

struct InitialProfile {
  std::string shape = "linear";  // linear | flat | bump | stationary
  double amplitude = 0.1;        // bump height
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::optional<Mode> mode;
  std::vector<int> n;
  std::vector<double> theta;
  double alpha = 0.2;
  double beta = 0.8;
  std::vector<double> times;
  std::size_t replicas = 0;
  std::uint64_t seed = 1;
  std::optional<double> burn_in;
  std::filesystem::path output = "sseplab-out";
  Tolerances tol;
  InitialProfile initial;
  std::vector<std::string> checks;          // bounds mode
  std::vector<std::string> test_functions;  // fluctuations mode: const, sin:k, cos:k
  std::vector<double> mu;                   // spectrum mode
  int modes = 64;                           // continuum truncation K
  std::string source_text;                  // raw bytes, for the hash
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Mode-dependent requirements (replicas for Monte Carlo modes and so on).
void validate_for_mode(const ExperimentConfig& cfg, Mode mode);

std::uint64_t fnv1a64(const std::string& bytes);

using Cell = std::variant<std::int64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

// First line is a "# generated <UTC time>" comment; doubles use %.17g.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);
std::string format_cell(const Cell& c);

struct CheckRow {
  std::string name;
  std::string anchor;  // where the checked statement lives
  double predicted = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  double margin = 0.0;  // >= 0 iff pass
  bool pass = false;
};

struct RunReport {
  Mode mode = Mode::Verify;
  std::vector<CheckRow> checks;
  std::map<std::string, std::string> provenance;
  std::vector<std::pair<std::string, double>> timing;  // seconds
  bool incomplete = false;
  std::string failure;

  bool all_pass() const;
  void write(const std::filesystem::path& path) const;
};

struct RunRequest {
  Mode mode = Mode::Verify;
  std::filesystem::path config;
  unsigned jobs = 0;
  std::optional<std::uint64_t> seed;  // --seed, else SSEPLAB_SEED, else the config
  std::optional<std::filesystem::path> out;
};

// 0 all checks pass, 1 a check failed or the run aborted, 2 config error.
int run(const RunRequest& req);

// Runs a validated config and returns the report; CSVs land in cfg.output.
RunReport run_experiment(const ExperimentConfig& cfg, Mode mode, unsigned jobs);

std::string version_string();

}  // namespace sseplab
