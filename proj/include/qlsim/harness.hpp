#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qlsim/numerics.hpp"

namespace qlsim {

// ---------------------------------------------------------------- generators

enum class Definiteness { positive, indefinite };

Definiteness parse_definiteness(const std::string& name);
std::string to_string(Definiteness d);

struct GeneratorSpec {
  Eigen::Index dimension = 4;
  double kappa = 2.0;
  Definiteness definiteness = Definiteness::positive;
  // Nonzeros per row; 0 means dense. Otherwise a power of two dividing the
  // dimension: the eigenbasis is block diagonal with blocks of this size.
  Eigen::Index sparsity = 0;
  // Round every free eigenvalue magnitude to a multiple of 1/snap (0: off).
  // The pinned extremes 1 and 1/kappa are left exact.
  std::uint64_t snap = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct MatrixAudit {
  double kappa = 0.0;
  Eigen::Index sparsity = 0;  // max nonzeros in a row (|entry| > 1e-12)
  int positive = 0;
  int negative = 0;
  double max_abs_eigenvalue = 0.0;
  double min_abs_eigenvalue = 0.0;
};
MatrixAudit audit_matrix(const HermitianOperator& a);

// Spectrum: 1 and 1/kappa pinned, the rest uniform in [1/kappa, 1];
// indefinite negates every other entry (including 1/kappa). The result is
// re-audited and AlgorithmError is raised if it misses the request.
HermitianOperator generate_hermitian(const GeneratorSpec& spec);
HermitianOperator generate_hermitian(Eigen::Index dim, double kappa, Definiteness d, std::uint64_t seed);

// Independent stream for trial `trial` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial);

// ------------------------------------------------------------ BQP reduction

// Clock values 1..3T are stored at indices 0..3T-1 of the first factor.
//   U = sum_{t=1}^{T}   |t+1><t| (x) U_t
//     + sum_{t=T+1}^{2T} |t+1><t| (x) I
//     + sum_{t=1}^{T}   |t+2T+1 mod 3T><t+2T| (x) U_{T+1-t}^dagger
//   A = I - U e^{-1/T}
struct SimulationMatrix {
  std::vector<ComplexMatrix> gates;
  int T = 0;
  int circuit_qubits = 0;
  ComplexMatrix unitary;
  ComplexMatrix a;

  Eigen::Index circuit_dim() const { return Eigen::Index{1} << circuit_qubits; }
  // kappa(A) bound (1 + e^{-1/T}) / (1 - e^{-1/T}).
  double kappa_bound() const;
  // |U^{3T} - I|_max
  double periodicity_error() const;
};

SimulationMatrix build_simulation_matrix(const std::vector<ComplexMatrix>& gates);

// T gates, each a Haar-random one- or two-qubit unitary on random wires of
// an n-qubit register (n = 1 gives single-qubit gates only).
std::vector<ComplexMatrix> random_circuit(int qubits, int gates, Rng& rng);
// Lift a gate on `wires` (qubit 0 is the most significant) to n qubits.
ComplexMatrix embed_gate(const ComplexMatrix& u, const std::vector<int>& wires, int qubits);

struct BqpReductionReport {
  int T = 0;
  int circuit_qubits = 0;
  std::uint64_t series_terms = 0;      // 3T ceil(20/3)
  double series_error = -1.0;          // |series - dense solve| (-1 when the dense check is skipped)
  double kappa = 0.0;
  double kappa_bound = 0.0;
  double periodicity_error = 0.0;
  double postselection_probability = 0.0;
  double probability_bound = 0.0;      // e^{-2} / (1 + e^{-2} + e^{-4})
  std::vector<double> circuit_distribution;      // |<y|U_T..U_1|0>|^2
  std::vector<double> postselected_distribution;
  double tv_distance = 0.0;            // full register
  double tv_first_qubit = 0.0;
  double sampled_tv = -1.0;            // from `samples` draws, -1 when samples == 0
};

// Needs ceil(log2(3T)) + n qubits within the budget.
BqpReductionReport bqp_reduction_experiment(const std::vector<ComplexMatrix>& gates, std::uint64_t samples = 0,
                                            std::uint64_t seed = 1);

// -------------------------------------------------------- tables and output

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

// Header row, then one line per row; doubles with 17 significant digits.
void write_csv(const Table& t, std::ostream& out);
void write_json(const Table& t, std::ostream& out);
std::string format_double(double v);

// -------------------------------------------------------- configuration

struct MatrixSource {
  std::optional<std::string> file;          // JSON matrix file
  std::optional<GeneratorSpec> generator;  // seed 0 inside: derived per trial
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct OutputSpec {
  std::string directory;   // empty: no files
  std::string format = "csv";
  std::string basename;    // defaults to the experiment name
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int trials = 1;
  int threads = 1;
  std::optional<MatrixSource> matrix;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<SweepSpec> sweep;
  OutputSpec output;
  nlohmann::json source = nlohmann::json::object();  // the validated document

  // FNV-1a of the canonical (key-sorted, compact) document without the
  // output and threads fields, which cannot change results. 16 hex digits.
  std::string hash() const;
};

// Strict: unknown keys and wrong types raise InputError naming the field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> known_experiments();

// Accepts a JSON array of rows (real) or {"re": rows, "im": rows}.
ComplexMatrix load_matrix_file(const std::string& path);
void save_matrix_file(const ComplexMatrix& m, const std::string& path);
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j, const std::string& where);

struct ExperimentResult {
  Table table;
  std::string config_hash;
  std::vector<std::string> files;
};

// Trials run on config.threads workers and merge by trial index, so the
// table does not depend on the thread count. Every row starts with
// config_hash, seed, trial.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace qlsim
