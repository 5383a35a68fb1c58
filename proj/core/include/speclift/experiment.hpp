#ifndef SPECLIFT_EXPERIMENT_HPP
#define SPECLIFT_EXPERIMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "speclift/models.hpp"

namespace speclift {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct BaselineMismatchError : std::runtime_error {
  explicit BaselineMismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// One verified identity: a stable name, the identity text, the measured
/// deviation against its tolerance, and interior/boundary bookkeeping.
struct CheckResult {
  std::string name;
  std::string identity;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool report_only = false;
  bool passed = true;
  Eigen::Index interior = 0;
  Eigen::Index boundary = 0;
};

struct SpectrumRow {
  int window = 0;
  std::string label;
  int index = 0;
  double eigenvalue = 0.0;
  Eigen::Index multiplicity = 1;
};

struct ExperimentResult {
  std::vector<CheckResult> checks;
  std::vector<SpectrumRow> spectrum;
  std::vector<std::pair<std::string, std::string>> conventions;

  bool all_passed() const;
  const CheckResult* first_failure() const;
};

enum class ExperimentKind { CrossedProduct, QuantumTorus, Homogeneous, CustomFactorSystem };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CrossedProduct;
  std::vector<int> windows;  // ascending
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  std::string raw_json;  // echoed into the report

  // crossed product / custom
  std::vector<double> base_diagonal;
  std::string automorphism = "cyclic";  // or "identity"
  int cyclic_order = 0;                 // custom: nonzero uses the finite dual group
  std::map<std::string, Complex> twists;  // custom: per-label phase twists "k" -> phase

  // quantum torus
  RealMatrix theta = RealMatrix::Zero(4, 4);
  int base_radius = 1;

  // homogeneous
  std::string homogeneous_group = "torus2";  // or "su2"
  std::vector<int> direction = {1, 1};
  std::vector<int> quadrature = {24, 48};
  int samples = 2;
};

/// Parses the JSON document; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string spectrum_csv(const std::vector<SpectrumRow>& rows);
std::string report_json(const ExperimentConfig& config, const ExperimentResult& result);
void write_file(const std::string& path, const std::string& contents);

struct CompareEntry {
  int window = 0;
  double before = 0.0;
  double after = 0.0;
};

struct CompareResult {
  bool structural_mismatch = false;
  std::string note;
  std::vector<CompareEntry> moved;  // eigenvalues beyond tolerance

  bool empty() const { return !structural_mismatch && moved.empty(); }
};

CompareResult compare_spectra(const std::vector<SpectrumRow>& current,
                              const std::string& baseline_csv, double tolerance);

}  // namespace speclift

#endif
