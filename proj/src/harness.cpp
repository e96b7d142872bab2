#include "qlsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "qlsim/approx.hpp"
#include "qlsim/circuits.hpp"
#include "qlsim/hamsim.hpp"
#include "qlsim/hhl.hpp"
#include "qlsim/qram.hpp"
#include "qlsim/qsve.hpp"
#include "qlsim/statesim.hpp"

namespace qlsim {

using nlohmann::json;

// ---------------------------------------------------------------- generators

Definiteness parse_definiteness(const std::string& name) {
  if (name == "positive") return Definiteness::positive;
  if (name == "indefinite") return Definiteness::indefinite;
  throw InputError("definiteness must be \"positive\" or \"indefinite\", got \"" + name + "\"");
}

std::string to_string(Definiteness d) { return d == Definiteness::positive ? "positive" : "indefinite"; }

void GeneratorSpec::validate() const {
  if (dimension < 1 || !is_power_of_two(static_cast<std::uint64_t>(dimension))) {
    throw InputError("generator dimension must be a power of two, got " + std::to_string(dimension));
  }
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InputError("generator kappa must be >= 1");
  if (dimension == 1 && kappa != 1.0) throw InputError("a 1x1 matrix has kappa 1");
  if (dimension == 1 && definiteness == Definiteness::indefinite) {
    throw InputError("a 1x1 matrix cannot be indefinite");
  }
  if (sparsity != 0 && (sparsity > dimension || !is_power_of_two(static_cast<std::uint64_t>(sparsity)))) {
    throw InputError("sparsity must be 0 or a power of two no larger than the dimension");
  }
}

MatrixAudit audit_matrix(const HermitianOperator& a) {
  MatrixAudit r;
  const auto d = eig_hermitian(a);
  const RVector mags = d.eigenvalues.cwiseAbs();
  r.max_abs_eigenvalue = mags.maxCoeff();
  r.min_abs_eigenvalue = mags.minCoeff();
  r.kappa = r.min_abs_eigenvalue > 0.0 ? r.max_abs_eigenvalue / r.min_abs_eigenvalue
                                       : std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    if (d.eigenvalues(i) > 0.0) ++r.positive;
    if (d.eigenvalues(i) < 0.0) ++r.negative;
  }
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    Eigen::Index nz = 0;
    for (Eigen::Index j = 0; j < a.dim(); ++j) {
      if (std::abs(a.matrix()(i, j)) > 1e-12) ++nz;
    }
    r.sparsity = std::max(r.sparsity, nz);
  }
  return r;
}

HermitianOperator generate_hermitian(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index n = spec.dimension;
  std::uniform_real_distribution<double> uni(1.0 / spec.kappa, 1.0);
  RVector eig(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = i == 0 ? 1.0 : i == 1 ? 1.0 / spec.kappa : uni(rng);
    if (i >= 2 && spec.snap > 0) {
      const double grid = static_cast<double>(spec.snap);
      v = std::round(v * grid) / grid;
      if (v < 1.0 / spec.kappa) v = std::ceil(grid / spec.kappa) / grid;
      v = std::clamp(v, 1.0 / spec.kappa, 1.0);
    }
    if (spec.definiteness == Definiteness::indefinite && i % 2 == 1) v = -v;
    eig(i) = v;
  }

  const Eigen::Index block = spec.sparsity == 0 ? n : spec.sparsity;
  ComplexMatrix basis = ComplexMatrix::Zero(n, n);
  for (Eigen::Index b = 0; b < n; b += block) basis.block(b, b, block, block) = random_unitary(block, rng);
  ComplexMatrix m = basis * eig.cast<Complex>().asDiagonal() * basis.adjoint();
  m = (0.5 * (m + m.adjoint())).eval();
  HermitianOperator h(m);

  const MatrixAudit audit = audit_matrix(h);
  if (std::abs(audit.kappa - spec.kappa) > 1e-9) {
    throw AlgorithmError("generated matrix has kappa " + format_double(audit.kappa) + ", wanted " +
                         format_double(spec.kappa));
  }
  if (spec.sparsity != 0 && audit.sparsity > spec.sparsity) {
    throw AlgorithmError("generated matrix is denser than requested");
  }
  const bool indefinite = audit.negative > 0 && audit.positive > 0;
  if ((spec.definiteness == Definiteness::indefinite) != indefinite) {
    throw AlgorithmError("generated matrix has the wrong definiteness");
  }
  return h;
}

HermitianOperator generate_hermitian(Eigen::Index dim, double kappa, Definiteness d, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.dimension = dim;
  spec.kappa = kappa;
  spec.definiteness = d;
  spec.seed = seed;
  return generate_hermitian(spec);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) {
  // splitmix64 finaliser over (seed, trial)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ------------------------------------------------------------ BQP reduction

double SimulationMatrix::kappa_bound() const {
  const double q = std::exp(-1.0 / T);
  return (1.0 + q) / (1.0 - q);
}

double SimulationMatrix::periodicity_error() const {
  const ComplexMatrix p = matrix_power(unitary, static_cast<std::uint64_t>(3 * T));
  return (p - ComplexMatrix::Identity(p.rows(), p.cols())).cwiseAbs().maxCoeff();
}

SimulationMatrix build_simulation_matrix(const std::vector<ComplexMatrix>& gates) {
  if (gates.empty()) throw InputError("the circuit needs at least one gate");
  const Eigen::Index d = gates[0].rows();
  if (d < 2 || !is_power_of_two(static_cast<std::uint64_t>(d))) {
    throw InputError("gates must act on a power-of-two dimension >= 2");
  }
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i].rows() != d || gates[i].cols() != d) {
      throw InputError("gate " + std::to_string(i + 1) + " has dimension " + std::to_string(gates[i].rows()) +
                       ", expected " + std::to_string(d));
    }
    if (!is_unitary(gates[i], 1e-9)) throw InputError("gate " + std::to_string(i + 1) + " is not unitary");
  }
  SimulationMatrix sm;
  sm.gates = gates;
  sm.T = static_cast<int>(gates.size());
  sm.circuit_qubits = ceil_log2(static_cast<std::uint64_t>(d));
  const Eigen::Index clock = 3 * sm.T;
  sm.unitary = ComplexMatrix::Zero(clock * d, clock * d);
  for (Eigen::Index c = 0; c < clock; ++c) {
    const Eigen::Index next = (c + 1) % clock;
    ComplexMatrix block;
    if (c < sm.T) {
      block = gates[static_cast<std::size_t>(c)];
    } else if (c < 2 * sm.T) {
      block = ComplexMatrix::Identity(d, d);
    } else {
      const auto s = static_cast<std::size_t>(c - 2 * sm.T + 1);  // 1..T
      block = gates[static_cast<std::size_t>(sm.T) - s].adjoint();
    }
    sm.unitary.block(next * d, c * d, d, d) = block;
  }
  sm.a = ComplexMatrix::Identity(clock * d, clock * d) - std::exp(-1.0 / sm.T) * sm.unitary;
  return sm;
}

ComplexMatrix embed_gate(const ComplexMatrix& u, const std::vector<int>& wires, int qubits) {
  const auto k = static_cast<int>(wires.size());
  if (u.rows() != (Eigen::Index{1} << k) || u.cols() != u.rows()) throw InputError("gate size does not match wires");
  std::set<int> distinct(wires.begin(), wires.end());
  if (static_cast<int>(distinct.size()) != k) throw InputError("gate wires must be distinct");
  for (int w : wires) {
    if (w < 0 || w >= qubits) throw InputError("gate wire out of range");
  }
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  auto sub_index = [&](Eigen::Index idx) {
    Eigen::Index s = 0;
    for (int w : wires) s = (s << 1) | ((idx >> (qubits - 1 - w)) & 1);
    return s;
  };
  auto with_sub = [&](Eigen::Index idx, Eigen::Index s) {
    for (int i = 0; i < k; ++i) {
      const int bit = qubits - 1 - wires[static_cast<std::size_t>(i)];
      const Eigen::Index v = (s >> (k - 1 - i)) & 1;
      idx = (idx & ~(Eigen::Index{1} << bit)) | (v << bit);
    }
    return idx;
  };
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Eigen::Index in = sub_index(col);
    for (Eigen::Index s = 0; s < u.rows(); ++s) out(with_sub(col, s), col) = u(s, in);
  }
  return out;
}

std::vector<ComplexMatrix> random_circuit(int qubits, int gates, Rng& rng) {
  if (qubits < 1 || gates < 1) throw InputError("random circuits need at least one qubit and one gate");
  std::vector<ComplexMatrix> out;
  std::uniform_int_distribution<int> wire(0, qubits - 1);
  std::bernoulli_distribution two(0.5);
  for (int g = 0; g < gates; ++g) {
    if (qubits >= 2 && two(rng)) {
      const int a = wire(rng);
      int b = wire(rng);
      while (b == a) b = wire(rng);
      out.push_back(embed_gate(random_unitary(4, rng), {a, b}, qubits));
    } else {
      out.push_back(embed_gate(random_unitary(2, rng), {wire(rng)}, qubits));
    }
  }
  return out;
}

namespace {

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::vector<double> first_qubit_marginal(const std::vector<double>& p) {
  std::vector<double> m(2, 0.0);
  const std::size_t half = p.size() / 2;
  for (std::size_t i = 0; i < p.size(); ++i) m[i < half ? 0 : 1] += p[i];
  return m;
}

}  // namespace

BqpReductionReport bqp_reduction_experiment(const std::vector<ComplexMatrix>& gates, std::uint64_t samples,
                                            std::uint64_t seed) {
  if (gates.empty()) throw InputError("the circuit needs at least one gate");
  const int T = static_cast<int>(gates.size());
  const int n = ceil_log2(static_cast<std::uint64_t>(gates[0].rows()));
  const int clock_qubits = ceil_log2(static_cast<std::uint64_t>(3 * T));
  if (clock_qubits + n > max_qubits()) {
    throw ResourceError("reduction needs " + std::to_string(clock_qubits + n) + " qubits, budget is " +
                        std::to_string(max_qubits()));
  }
  const SimulationMatrix sm = build_simulation_matrix(gates);
  const Eigen::Index d = sm.circuit_dim();
  const Eigen::Index dim = sm.unitary.rows();

  BqpReductionReport r;
  r.T = T;
  r.circuit_qubits = n;
  r.kappa_bound = sm.kappa_bound();
  r.periodicity_error = sm.periodicity_error();
  r.probability_bound = std::exp(-2.0) / (1.0 + std::exp(-2.0) + std::exp(-4.0));
  const Eigen::JacobiSVD<ComplexMatrix> svd_a(sm.a);
  r.kappa = svd_a.singularValues()(0) / svd_a.singularValues()(svd_a.singularValues().size() - 1);

  // |1>|0^n> -> A^{-1}|1>|0^n> = sum_k e^{-k/T} U^k |1>|0^n>
  r.series_terms = static_cast<std::uint64_t>(3 * T) * static_cast<std::uint64_t>(std::ceil(20.0 / 3.0));
  CVector term = CVector::Zero(dim);
  term(0) = 1.0;
  const CVector input = term;
  CVector x = CVector::Zero(dim);
  const double decay = std::exp(-1.0 / T);
  double weight = 1.0;
  for (std::uint64_t k = 0; k < r.series_terms; ++k) {
    x += weight * term;
    term = sm.unitary * term;
    weight *= decay;
  }
  if (dim <= 4096) r.series_error = (x - sm.a.partialPivLu().solve(input)).norm();

  const double total = x.squaredNorm();
  std::vector<double> post(static_cast<std::size_t>(d), 0.0);
  double kept = 0.0;
  for (Eigen::Index c = T; c < 2 * T; ++c) {  // clock values T+1 .. 2T
    for (Eigen::Index y = 0; y < d; ++y) {
      const double w = std::norm(x(c * d + y));
      post[static_cast<std::size_t>(y)] += w;
      kept += w;
    }
  }
  r.postselection_probability = kept / total;
  for (double& p : post) p /= kept;
  r.postselected_distribution = post;

  CVector psi = CVector::Zero(d);
  psi(0) = 1.0;
  for (const auto& g : gates) psi = g * psi;
  r.circuit_distribution.resize(static_cast<std::size_t>(d));
  for (Eigen::Index y = 0; y < d; ++y) r.circuit_distribution[static_cast<std::size_t>(y)] = std::norm(psi(y));

  r.tv_distance = total_variation(r.postselected_distribution, r.circuit_distribution);
  r.tv_first_qubit =
      total_variation(first_qubit_marginal(r.postselected_distribution), first_qubit_marginal(r.circuit_distribution));

  if (samples > 0) {
    Rng rng(seed);
    std::discrete_distribution<std::size_t> draw(post.begin(), post.end());
    std::vector<double> hist(post.size(), 0.0);
    for (std::uint64_t i = 0; i < samples; ++i) hist[draw(rng)] += 1.0;
    for (double& h : hist) h /= static_cast<double>(samples);
    r.sampled_tv = total_variation(hist, r.circuit_distribution);
  }
  return r;
}

// -------------------------------------------------------- tables and output

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw AlgorithmError("row has " + std::to_string(row.size()) + " cells, table has " +
                         std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return csv_escape(std::get<std::string>(c));
}

}  // namespace

void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_escape(t.columns[i]);
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
}

void write_json(const Table& t, std::ostream& out) {
  json doc;
  doc["columns"] = t.columns;
  doc["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) {
      if (const auto* i = std::get_if<std::int64_t>(&c)) {
        r.push_back(*i);
      } else if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) {
          r.push_back(*d);
        } else {
          r.push_back(format_double(*d));
        }
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    doc["rows"].push_back(std::move(r));
  }
  out << doc.dump(1) << '\n';
}

// -------------------------------------------------------- configuration

namespace {

const std::map<std::string, std::set<std::string>>& experiment_parameters() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"hhl", {"t", "t0", "kappa", "window", "mode", "evolution", "trotter_steps", "b"}},
      {"qlss", {"t", "config_index", "kappa"}},
      {"qsve", {"delta"}},
      {"qpe", {"t", "phase"}},
      {"grover", {"qubits", "marked", "max_iterations"}},
      {"qram", {"dimension", "eps_rot"}},
      {"trotter", {"dimension", "t", "m"}},
      {"fourier_inverse", {"kappa", "epsilon", "grid"}},
      {"bqp_reduction", {"qubits", "gates", "samples"}},
      {"gen_matrix", {}},
  };
  return table;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw InputError(where + "." + key + ": unknown field");
  }
}

std::uint64_t get_u64(const json& j, const std::string& where) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw InputError(where + ": expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

int get_int(const json& j, const std::string& where, int lo, int hi) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) {
    throw InputError(where + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

double get_double(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where + ": must be finite");
  return v;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw InputError(where + ": expected a string");
  return j.get<std::string>();
}

GeneratorSpec parse_generator(const json& g, const std::string& where) {
  check_keys(g, {"dimension", "kappa", "definiteness", "sparsity", "snap", "seed"}, where);
  GeneratorSpec spec;
  spec.seed = 0;
  if (g.contains("dimension")) spec.dimension = get_int(g["dimension"], where + ".dimension", 1, 64);
  if (g.contains("kappa")) spec.kappa = get_double(g["kappa"], where + ".kappa");
  if (g.contains("definiteness")) spec.definiteness = parse_definiteness(get_string(g["definiteness"], where + ".definiteness"));
  if (g.contains("sparsity")) spec.sparsity = get_int(g["sparsity"], where + ".sparsity", 0, 64);
  if (g.contains("snap")) spec.snap = get_u64(g["snap"], where + ".snap");
  if (g.contains("seed")) spec.seed = get_u64(g["seed"], where + ".seed");
  try {
    spec.validate();
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
  return spec;
}

}  // namespace

std::vector<std::string> known_experiments() {
  std::vector<std::string> out;
  for (const auto& [name, params] : experiment_parameters()) out.push_back(name);
  return out;
}

std::string ExperimentConfig::hash() const {
  json canonical = source;
  canonical.erase("output");
  canonical.erase("threads");
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, {"experiment", "seed", "trials", "threads", "matrix", "parameters", "sweep", "output"}, "config");
  ExperimentConfig cfg;
  if (!doc.contains("experiment")) throw InputError("config.experiment: required field is missing");
  cfg.experiment = get_string(doc["experiment"], "config.experiment");
  const auto& params = experiment_parameters();
  const auto it = params.find(cfg.experiment);
  if (it == params.end()) throw InputError("config.experiment: unknown experiment \"" + cfg.experiment + "\"");

  if (doc.contains("seed")) cfg.seed = get_u64(doc["seed"], "config.seed");
  if (doc.contains("trials")) cfg.trials = get_int(doc["trials"], "config.trials", 1, 1000000);
  if (doc.contains("threads")) cfg.threads = get_int(doc["threads"], "config.threads", 1, 1024);

  if (doc.contains("matrix")) {
    const json& m = doc["matrix"];
    check_keys(m, {"file", "generator"}, "config.matrix");
    MatrixSource src;
    if (m.contains("file") == m.contains("generator")) {
      throw InputError("config.matrix: give exactly one of \"file\" or \"generator\"");
    }
    if (m.contains("file")) src.file = get_string(m["file"], "config.matrix.file");
    if (m.contains("generator")) src.generator = parse_generator(m["generator"], "config.matrix.generator");
    cfg.matrix = src;
  }

  if (doc.contains("parameters")) {
    check_keys(doc["parameters"], it->second, "config.parameters");
    cfg.parameters = doc["parameters"];
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    check_keys(s, {"parameter", "values"}, "config.sweep");
    if (!s.contains("parameter") || !s.contains("values")) {
      throw InputError("config.sweep: needs \"parameter\" and \"values\"");
    }
    SweepSpec sweep;
    sweep.parameter = get_string(s["parameter"], "config.sweep.parameter");
    if (!it->second.count(sweep.parameter)) {
      throw InputError("config.sweep.parameter: \"" + sweep.parameter + "\" is not a parameter of " + cfg.experiment);
    }
    if (!s["values"].is_array() || s["values"].empty()) {
      throw InputError("config.sweep.values: expected a non-empty array");
    }
    for (std::size_t i = 0; i < s["values"].size(); ++i) {
      sweep.values.push_back(get_double(s["values"][i], "config.sweep.values[" + std::to_string(i) + "]"));
    }
    cfg.sweep = sweep;
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, {"directory", "format", "basename"}, "config.output");
    if (o.contains("directory")) cfg.output.directory = get_string(o["directory"], "config.output.directory");
    if (o.contains("format")) cfg.output.format = get_string(o["format"], "config.output.format");
    if (o.contains("basename")) cfg.output.basename = get_string(o["basename"], "config.output.basename");
    if (cfg.output.format != "csv" && cfg.output.format != "json") {
      throw InputError("config.output.format: must be \"csv\" or \"json\"");
    }
  }
  cfg.source = doc;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json matrix_to_json(const ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"re", re}, {"im", im}};
}

namespace {

Eigen::MatrixXd real_rows(const json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty()) throw InputError(where + ": expected a non-empty array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  if (cols == 0) throw InputError(where + ": rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) throw InputError(where + ": ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          get_double(rows[i][j], where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return m;
}

}  // namespace

ComplexMatrix matrix_from_json(const json& j, const std::string& where) {
  if (j.is_array()) return real_rows(j, where).cast<Complex>();
  check_keys(j, {"re", "im"}, where);
  if (!j.contains("re")) throw InputError(where + ".re: required field is missing");
  const Eigen::MatrixXd re = real_rows(j["re"], where + ".re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_rows(j["im"], where + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) throw InputError(where + ": re and im shapes differ");
  }
  ComplexMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

ComplexMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("matrix file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("matrix file " + path + " is not valid JSON: " + e.what());
  }
  return matrix_from_json(doc, path);
}

void save_matrix_file(const ComplexMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << matrix_to_json(m).dump(1) << '\n';
}

// -------------------------------------------------------- experiments

namespace {

// Typed access to one job's parameters with defaults.
class Params {
 public:
  explicit Params(json j) : j_(std::move(j)) {}
  bool has(const std::string& k) const { return j_.contains(k); }
  double number(const std::string& k, double def) const {
    return has(k) ? get_double(j_.at(k), "config.parameters." + k) : def;
  }
  int integer(const std::string& k, int def, int lo, int hi) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    // Sweep values arrive as doubles; accept integral ones.
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d != std::floor(d)) throw InputError("config.parameters." + k + ": expected an integer");
      return get_int(json(static_cast<std::int64_t>(d)), "config.parameters." + k, lo, hi);
    }
    return get_int(v, "config.parameters." + k, lo, hi);
  }
  std::string text(const std::string& k, const std::string& def) const {
    return has(k) ? get_string(j_.at(k), "config.parameters." + k) : def;
  }
  const json& raw(const std::string& k) const { return j_.at(k); }

 private:
  json j_;
};

struct Job {
  std::size_t sweep_index = 0;
  int trial = 0;
  Params params;
};

using Rows = std::vector<std::vector<Cell>>;

HermitianOperator job_matrix(const ExperimentConfig& cfg, int trial, GeneratorSpec fallback) {
  if (cfg.matrix && cfg.matrix->file) return HermitianOperator(load_matrix_file(*cfg.matrix->file));
  GeneratorSpec spec = cfg.matrix && cfg.matrix->generator ? *cfg.matrix->generator : fallback;
  if (spec.seed == 0) spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  return generate_hermitian(spec);
}

CVector job_vector(const Params& p, Eigen::Index dim, Rng& rng) {
  if (!p.has("b")) return random_state(dim, rng);
  const json& b = p.raw("b");
  if (!b.is_array() || static_cast<Eigen::Index>(b.size()) != dim) {
    throw InputError("config.parameters.b: expected an array of " + std::to_string(dim) + " numbers");
  }
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = get_double(b[static_cast<std::size_t>(i)], "config.parameters.b[" + std::to_string(i) + "]");
  }
  return v;
}

struct Experiment {
  std::vector<std::string> columns;
  std::function<Rows(const ExperimentConfig&, const Job&, Rng&)> run;
};

Experiment make_experiment(const std::string& name) {
  if (name == "hhl") {
    return {{"t", "t0", "kappa", "fidelity", "success_probability", "predicted_probability", "representable",
             "qubits"},
            [](const ExperimentConfig& cfg, const Job& job, Rng& rng) -> Rows {
              GeneratorSpec fallback;
              fallback.dimension = 4;
              fallback.kappa = 4.0;
              fallback.seed = 0;
              const HermitianOperator a = job_matrix(cfg, job.trial, fallback);
              const Params& p = job.params;
              HhlConfig h;
              h.t = p.integer("t", 8, 1, 20);
              h.t0 = p.number("t0", 2.0 * kPi * static_cast<double>(h.clock_size()) / 4.0);
              h.filter.kappa = p.number("kappa", audit_matrix(a).kappa);
              const std::string window = p.text("window", "sine");
              if (window != "sine" && window != "uniform") throw InputError("config.parameters.window: sine or uniform");
              h.window = window == "sine" ? ClockWindow::sine : ClockWindow::uniform;
              const std::string mode = p.text("mode", "rus");
              if (mode != "rus" && mode != "aa") throw InputError("config.parameters.mode: rus or aa");
              h.mode = mode == "rus" ? PostselectMode::repeat_until_success : PostselectMode::amplitude_amplify;
              const std::string evo = p.text("evolution", "exact");
              if (evo != "exact" && evo != "trotter") throw InputError("config.parameters.evolution: exact or trotter");
              h.evolution = evo == "exact" ? EvolutionMethod::exact : EvolutionMethod::trotter;
              h.trotter_steps = p.integer("trotter_steps", 64, 1, 1 << 20);
              h.seed = rng();
              const CVector b = job_vector(p, a.dim(), rng);
              const auto r = hhl_solve(a, b, h);
              return {{std::int64_t{h.t}, h.t0, h.filter.kappa, r.report.fidelity, r.report.success_probability,
                       r.report.predicted_probability, std::int64_t{r.report.representable ? 1 : 0},
                       std::int64_t{r.report.qubits}}};
            }};
  }
  if (name == "qlss") {
    return {{"kappa", "fidelity", "success_probability", "predicted_probability", "tie_weight", "retries", "qubits"},
            [](const ExperimentConfig& cfg, const Job& job, Rng& rng) -> Rows {
              const Params& p = job.params;
              HermitianOperator a(ComplexMatrix::Identity(1, 1));
              QlssConfig q;
              if (cfg.matrix) {
                GeneratorSpec fallback;
                a = job_matrix(cfg, job.trial, fallback);
                q.t = p.integer("t", 5, 1, 10);
                q.kappa = p.number("kappa", audit_matrix(a).kappa);
              } else {
                const int t = p.integer("t", 5, 2, 6);
                const auto configs = qlss_exact_configurations(t);
                if (configs.empty()) throw InputError("no exact configurations for t = " + std::to_string(t));
                const int index = p.integer("config_index", 0, 0, static_cast<int>(configs.size()) - 1);
                auto inst = qlss_exact_instance(configs[static_cast<std::size_t>(index)], rng);
                a = inst.first;
                q = inst.second;
              }
              const CVector b = random_state(a.dim(), rng);
              const auto r = qlss_solve(a, b, q);
              return {{q.kappa, r.report.fidelity, r.report.success_probability, r.report.predicted_probability,
                       r.report.tie_weight, std::int64_t{r.report.retries}, std::int64_t{r.report.qubits}}};
            }};
  }
  if (name == "qsve") {
    return {{"index", "sigma", "estimate", "abs_error", "within_bound"},
            [](const ExperimentConfig& cfg, const Job& job, Rng&) -> Rows {
              GeneratorSpec fallback;
              fallback.seed = 0;
              ComplexMatrix a = cfg.matrix && cfg.matrix->file ? load_matrix_file(*cfg.matrix->file)
                                                                : job_matrix(cfg, job.trial, fallback).matrix();
              const double delta = job.params.number("delta", 0.05);
              const auto f = build_factorisation(a);
              const auto d = svd(a);
              Rows rows;
              for (Eigen::Index i = 0; i < d.sigma.size(); ++i) {
                const double est = qsve_estimate(f, d.v.col(i), delta).most_likely_sigma();
                const double err = std::abs(est - d.sigma(i));
                rows.push_back({std::int64_t{i}, d.sigma(i), est, err,
                                std::int64_t{err <= delta * f.frobenius ? 1 : 0}});
              }
              return rows;
            }};
  }
  if (name == "qpe") {
    return {{"k", "probability"}, [](const ExperimentConfig&, const Job& job, Rng&) -> Rows {
              PhaseEstimationConfig pe;
              pe.t = job.params.integer("t", 6, 1, 20);
              const double phase = job.params.number("phase", 1.0 / 3.0);
              pe.u = ComplexMatrix::Identity(2, 2);
              pe.u(1, 1) = std::exp(2.0 * kPi * kI * phase);
              CVector one = CVector::Unit(2, 1);
              const auto s = phase_estimate(pe, one);
              const auto probs = register_probabilities(s, s.reg("C"));
              Rows rows;
              for (std::size_t k = 0; k < probs.size(); ++k) rows.push_back({static_cast<std::int64_t>(k), probs[k]});
              return rows;
            }};
  }
  if (name == "grover") {
    return {{"k", "simulated", "closed_form", "abs_diff"}, [](const ExperimentConfig&, const Job& job, Rng& rng) -> Rows {
              GroverProblem g;
              g.n = job.params.integer("qubits", 6, 1, 20);
              const auto N = g.size();
              const int m = job.params.integer("marked", 1, 1, static_cast<int>(std::min<std::uint64_t>(N, 1 << 20)));
              std::vector<std::uint64_t> all(N);
              std::iota(all.begin(), all.end(), 0);
              std::shuffle(all.begin(), all.end(), rng);
              g.marked.assign(all.begin(), all.begin() + m);
              std::sort(g.marked.begin(), g.marked.end());
              const int kmax = job.params.integer("max_iterations", 10, 0, 10000);
              const double theta = std::asin(std::sqrt(static_cast<double>(m) / static_cast<double>(N)));
              Rows rows;
              for (int k = 0; k <= kmax; ++k) {
                const double sim = grover_run(g, k);
                const double closed = std::pow(std::sin((2 * k + 1) * theta), 2);
                rows.push_back({std::int64_t{k}, sim, closed, std::abs(sim - closed)});
              }
              return rows;
            }};
  }
  if (name == "qram") {
    return {{"dimension", "eps_rot", "load_error", "noisy_deviation", "rotations", "bound"},
            [](const ExperimentConfig&, const Job& job, Rng& rng) -> Rows {
              const int dim = job.params.integer("dimension", 128, 2, 1 << 20);
              const double eps = job.params.number("eps_rot", 0.01);
              const RVector x = random_real_vector(dim, rng);
              std::vector<double> xv(x.data(), x.data() + x.size());
              const QramTree tree = build_tree(xv);
              const CVector loaded = to_cvector(qram_state(xv));
              CVector exact = CVector::Zero(loaded.size());
              for (int i = 0; i < dim; ++i) exact(i) = xv[static_cast<std::size_t>(i)] / tree.norm();
              RegisterLayout l;
              l.add("I", tree.depth());
              const auto noisy = load_noisy(tree, init_basis(l, 0), l["I"], RotationNoise{eps, rng()});
              const double dev = (to_cvector(noisy.state) - loaded).norm();
              return {{std::int64_t{dim}, eps, (loaded - exact).norm(), dev, static_cast<std::int64_t>(noisy.rotations),
                       static_cast<double>(noisy.rotations) * eps}};
            }};
  }
  if (name == "trotter") {
    return {{"dimension", "t", "m", "error"}, [](const ExperimentConfig&, const Job& job, Rng& rng) -> Rows {
              const int dim = job.params.integer("dimension", 4, 2, 64);
              if (!is_power_of_two(static_cast<std::uint64_t>(dim))) {
                throw InputError("config.parameters.dimension: must be a power of two");
              }
              TrotterPlan plan;
              plan.terms = {random_hermitian(dim, rng), random_hermitian(dim, rng)};
              plan.t = job.params.number("t", 1.0);
              plan.m = job.params.integer("m", 64, 1, 1 << 24);
              return {{std::int64_t{dim}, plan.t, std::int64_t{plan.m}, trotter_error(plan)}};
            }};
  }
  if (name == "fourier_inverse") {
    return {{"x", "re_h", "inv_x", "abs_err"}, [](const ExperimentConfig&, const Job& job, Rng&) -> Rows {
              const double kappa = job.params.number("kappa", 5.0);
              const double eps = job.params.number("epsilon", 0.05);
              const int grid = job.params.integer("grid", 4000, 1000, 1 << 22);
              const auto p = fourier_inverse_params(kappa, eps, grid);
              const auto audit = sup_error_on_domain(p, kappa, grid);
              Rows rows;
              for (std::size_t i = audit.grid.size(); i-- > 0;) {
                const double x = -audit.grid[i];
                const double h = evaluate_h_real(x, p);
                rows.push_back({x, h, 1.0 / x, std::abs(h - 1.0 / x)});
              }
              for (std::size_t i = 0; i < audit.grid.size(); ++i) {
                const double x = audit.grid[i];
                rows.push_back({x, evaluate_h_real(x, p), 1.0 / x, audit.errors[i]});
              }
              return rows;
            }};
  }
  if (name == "bqp_reduction") {
    return {{"T", "qubits", "tv_distance", "tv_first_qubit", "sampled_tv", "postselection_probability",
             "probability_bound", "kappa", "kappa_bound", "periodicity_error", "series_error"},
            [](const ExperimentConfig&, const Job& job, Rng& rng) -> Rows {
              const int n = job.params.integer("qubits", 2, 1, 8);
              const int T = job.params.integer("gates", 6, 1, 64);
              const auto samples = static_cast<std::uint64_t>(job.params.integer("samples", 0, 0, 1 << 30));
              const auto gates = random_circuit(n, T, rng);
              const auto r = bqp_reduction_experiment(gates, samples, rng());
              return {{std::int64_t{T}, std::int64_t{n}, r.tv_distance, r.tv_first_qubit, r.sampled_tv,
                       r.postselection_probability, r.probability_bound, r.kappa, r.kappa_bound, r.periodicity_error,
                       r.series_error}};
            }};
  }
  if (name == "gen_matrix") {
    return {{"dimension", "kappa", "sparsity", "positive", "negative", "matrix"},
            [](const ExperimentConfig& cfg, const Job& job, Rng&) -> Rows {
              GeneratorSpec fallback;
              fallback.seed = 0;
              const HermitianOperator a = job_matrix(cfg, job.trial, fallback);
              const auto audit = audit_matrix(a);
              return {{std::int64_t{a.dim()}, audit.kappa, std::int64_t{audit.sparsity}, std::int64_t{audit.positive},
                       std::int64_t{audit.negative}, matrix_to_json(a.matrix()).dump()}};
            }};
  }
  throw InputError("unknown experiment \"" + name + "\"");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Experiment exp = make_experiment(config.experiment);
  ExperimentResult result;
  result.config_hash = config.hash();
  result.table.columns = {"config_hash", "seed", "trial"};
  result.table.columns.insert(result.table.columns.end(), exp.columns.begin(), exp.columns.end());

  std::vector<Job> jobs;
  const std::size_t points = config.sweep ? config.sweep->values.size() : 1;
  for (std::size_t s = 0; s < points; ++s) {
    json params = config.parameters;
    if (config.sweep) params[config.sweep->parameter] = config.sweep->values[s];
    for (int trial = 0; trial < config.trials; ++trial) jobs.push_back(Job{s, trial, Params(params)});
  }

  std::vector<Rows> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < jobs.size(); i += stride) {
      try {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(jobs[i].trial)));
        out[i] = exp.run(config, jobs[i], rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.threads)), jobs.size());
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (auto& row : out[i]) {
      std::vector<Cell> full = {result.config_hash, static_cast<std::int64_t>(config.seed),
                                std::int64_t{jobs[i].trial}};
      full.insert(full.end(), row.begin(), row.end());
      result.table.add_row(std::move(full));
    }
  }

  if (!config.output.directory.empty()) {
    std::filesystem::create_directories(config.output.directory);
    const std::string base = config.output.basename.empty() ? config.experiment : config.output.basename;
    const std::string path = config.output.directory + "/" + base + "." + config.output.format;
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    if (config.output.format == "csv") {
      write_csv(result.table, f);
    } else {
      write_json(result.table, f);
    }
    result.files.push_back(path);
  }
  return result;
}

}  // namespace qlsim
