#include "qlsim/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qlsim {

ComplexMatrix dft_matrix(int qubits) {
  const auto N = static_cast<Eigen::Index>(std::uint64_t{1} << qubits);
  ComplexMatrix d(N, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (Eigen::Index j = 0; j < N; ++j)
    for (Eigen::Index k = 0; k < N; ++k) {
      const auto jk = static_cast<double>((j * k) % N);
      d(j, k) = std::polar(scale, 2.0 * kPi * jk / static_cast<double>(N));
    }
  return d;
}

namespace {

const ComplexMatrix& hadamard() {
  static const ComplexMatrix h = [] {
    ComplexMatrix m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
  }();
  return h;
}

// Phase exp(sign * 2 pi i * sum_{k>j} b_j b_k / 2^{k-j+1}) over the register:
// all controlled-R gates that target qubit j, merged into one diagonal pass.
void qft_phase_layer(StateVector& s, const Register& r, int j, double sign) {
  const int sh = s.shift(r);
  const int w = r.width;
  const std::uint64_t dim = r.dim();
  std::vector<Complex> table(dim, Complex(1.0, 0.0));
  for (std::uint64_t v = 0; v < dim; ++v) {
    if (!((v >> (w - 1 - j)) & 1U)) continue;
    double angle = 0.0;
    for (int k = j + 1; k < w; ++k)
      if ((v >> (w - 1 - k)) & 1U) angle += 2.0 * kPi / std::ldexp(1.0, k - j + 1);
    table[v] = std::polar(1.0, sign * angle);
  }
  auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (amps[i] == Complex(0.0, 0.0)) continue;
    amps[i] *= table[(i >> sh) & (dim - 1)];
  }
}

void reverse_register_bits(StateVector& s, const Register& r) {
  const int sh = s.shift(r);
  const int w = r.width;
  std::vector<std::uint64_t> rev(r.dim());
  for (std::uint64_t v = 0; v < r.dim(); ++v) {
    std::uint64_t x = 0;
    for (int b = 0; b < w; ++b)
      if (v & (std::uint64_t{1} << b)) x |= std::uint64_t{1} << (w - 1 - b);
    rev[v] = x;
  }
  auto& amps = s.amplitudes();
  const std::uint64_t mask = s.mask(r);
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const std::uint64_t v = (i >> sh) & (r.dim() - 1);
    const std::uint64_t j = (i & ~mask) | (rev[v] << sh);
    if (j > i) std::swap(amps[i], amps[j]);
  }
}

}  // namespace

void qft(StateVector& s, const Register& r) {
  if (r.width < 1) throw InputError("QFT needs a register of width >= 1");
  for (int j = 0; j < r.width; ++j) {
    apply_unitary(s, hadamard(), r.qubit(j));
    qft_phase_layer(s, r, j, +1.0);
  }
  reverse_register_bits(s, r);
}

void inverse_qft(StateVector& s, const Register& r) {
  if (r.width < 1) throw InputError("QFT needs a register of width >= 1");
  reverse_register_bits(s, r);
  for (int j = r.width - 1; j >= 0; --j) {
    qft_phase_layer(s, r, j, -1.0);
    apply_unitary(s, hadamard(), r.qubit(j));
  }
}

PhaseEstimationConfig phase_estimation_for_hamiltonian(const HermitianOperator& h, double t0, int t) {
  PhaseEstimationConfig cfg;
  cfg.t = t;
  cfg.u = matrix_exponential_exact(h, -t0 / std::ldexp(1.0, t));
  return cfg;
}

void apply_controlled_powers(StateVector& s, const Register& clock, const Register& target,
                             const ComplexMatrix& u, bool inverse) {
  const int t = clock.width;
  std::vector<ComplexMatrix> powers(static_cast<std::size_t>(t));
  ComplexMatrix p = u;
  for (int q = t - 1; q >= 0; --q) {
    powers[static_cast<std::size_t>(q)] = inverse ? ComplexMatrix(p.adjoint()) : p;
    if (q > 0) p = p * p;
  }
  // All factors commute (they are powers of one unitary on disjoint controls),
  // so the order of application is immaterial.
  for (int q = 0; q < t; ++q) apply_controlled(s, powers[static_cast<std::size_t>(q)], clock.qubit(q), 1, target);
}

namespace {
void check_clock(const PhaseEstimationConfig& cfg, const StateVector& s, const Register& clock) {
  if (cfg.t < 1) throw InputError("phase estimation needs t >= 1");
  if (clock.width != cfg.t) throw InputError("clock register width differs from t");
  if (!is_unitary(cfg.u, 1e-10)) throw InputError("phase estimation target is not unitary");
  const double p0 = register_probabilities(s, clock)[0];
  if (std::abs(p0 - s.norm() * s.norm()) > 1e-10) throw InputError("clock register is not in |0...0>");
}
}  // namespace

void phase_estimate(const PhaseEstimationConfig& cfg, StateVector& s, const Register& clock,
                    const Register& target) {
  check_clock(cfg, s, clock);
  for (int q = 0; q < clock.width; ++q) apply_unitary(s, hadamard(), clock.qubit(q));
  apply_controlled_powers(s, clock, target, cfg.u);
  inverse_qft(s, clock);
}

void inverse_phase_estimate(const PhaseEstimationConfig& cfg, StateVector& s, const Register& clock,
                            const Register& target) {
  qft(s, clock);
  apply_controlled_powers(s, clock, target, cfg.u, true);
  for (int q = 0; q < clock.width; ++q) apply_unitary(s, hadamard(), clock.qubit(q));
}

StateVector phase_estimate(const PhaseEstimationConfig& cfg, const CVector& input) {
  const auto n = ceil_log2(static_cast<std::uint64_t>(input.size()));
  if (input.size() != cfg.u.rows() || (std::int64_t{1} << n) != input.size()) {
    throw InputError("phase estimation input does not match the unitary's dimension");
  }
  if (cfg.t + n > max_qubits()) {
    throw ResourceError("phase estimation needs " + std::to_string(cfg.t + n) + " qubits, budget is " +
                        std::to_string(max_qubits()));
  }
  RegisterLayout layout;
  layout.add("C", cfg.t).add("I", n);
  StateVector s = init_basis(layout, 0);
  for (Eigen::Index i = 0; i < input.size(); ++i) s[static_cast<std::uint64_t>(i)] = input(i);
  s.normalise();
  phase_estimate(cfg, s, s.reg("C"), s.reg("I"));
  return s;
}

Complex qpe_amplitude_direct(double lambda, double t0, std::uint64_t T, std::uint64_t k) {
  const double Td = static_cast<double>(T);
  const double delta = lambda * t0 - 2.0 * kPi * static_cast<double>(k);
  Complex acc(0.0, 0.0);
  for (std::uint64_t tau = 0; tau < T; ++tau) {
    const double td = static_cast<double>(tau);
    acc += std::polar(std::sin(kPi * (td + 0.5) / Td), td * delta / Td);
  }
  return acc * std::sqrt(2.0) / Td;
}

QpeAmplitude qpe_amplitude_closed_form(std::uint64_t j, std::uint64_t k, double lambda, double t0,
                                       std::uint64_t T) {
  if (!is_power_of_two(T)) throw InputError("T must be a power of two");
  QpeAmplitude out;
  out.j = j;
  out.k = k;
  const double Td = static_cast<double>(T);
  const double delta = lambda * t0 - 2.0 * kPi * static_cast<double>(k);
  out.delta = delta;
  const double s_plus = std::sin((delta + kPi) / (2.0 * Td));
  const double s_minus = std::sin((delta - kPi) / (2.0 * Td));
  if (std::abs(s_plus) < 1e-12 || std::abs(s_minus) < 1e-12) {
    out.alpha = qpe_amplitude_direct(lambda, t0, T, k);
    return out;
  }
  // Geometric-series evaluation of the sine-window sum.
  const double mag = -(std::sqrt(2.0) * std::cos(delta / 2.0) / Td) * std::cos(delta / (2.0 * Td)) *
                     std::sin(kPi / (2.0 * Td)) / (s_plus * s_minus);
  out.alpha = std::polar(1.0, 0.5 * delta * (1.0 - 1.0 / Td)) * mag;
  return out;
}

void controlled_rotation_by_register(StateVector& s, const Register& value,
                                     const std::function<double(std::uint64_t)>& theta,
                                     const Register& target_qubit) {
  if (target_qubit.width != 1) throw InputError("rotation target must be a single qubit");
  double excited = 0.0;
  const auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i)
    if (s.value(i, target_qubit) == 1) excited += std::norm(amps[i]);
  if (excited > 1e-12) throw InputError("rotation target qubit is not in |0> on every branch");
  std::vector<ComplexMatrix> gates;
  gates.reserve(value.dim());
  for (std::uint64_t v = 0; v < value.dim(); ++v) {
    const double th = theta(v);
    ComplexMatrix g(2, 2);
    g << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    gates.push_back(std::move(g));
  }
  apply_multiplexed(s, value, target_qubit, gates);
}

void GroverProblem::validate() const {
  if (n < 1 || n > max_qubits()) throw InputError("Grover problem size out of range");
  std::set<std::uint64_t> uniq(marked.begin(), marked.end());
  if (uniq.size() != marked.size()) throw InputError("marked items must be distinct");
  if (marked.empty() || marked.size() >= size()) throw InputError("Grover problem needs 1 <= M < N");
  for (auto m : marked)
    if (m >= size()) throw InputError("marked item out of range");
}

void apply_phase_oracle(StateVector& s, const Register& r, const std::vector<std::uint64_t>& marked) {
  const std::set<std::uint64_t> good(marked.begin(), marked.end());
  auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i)
    if (good.count(s.value(i, r))) amps[i] = -amps[i];
}

void apply_diffusion(StateVector& s, const Register& r) {
  CVector uniform = CVector::Constant(static_cast<Eigen::Index>(r.dim()), 1.0);
  // 2|u><u| - I = -(I - 2|u><u|)
  apply_reflection(s, uniform, r);
  for (auto& a : s.amplitudes()) a = -a;
}

StateVector grover_state(const GroverProblem& p, int iterations) {
  p.validate();
  if (iterations < 0) throw InputError("iteration count must be non-negative");
  RegisterLayout layout;
  layout.add("Q", p.n);
  const double amp = 1.0 / std::sqrt(static_cast<double>(p.size()));
  StateVector s(layout, std::vector<Complex>(p.size(), Complex(amp, 0.0)));
  for (int k = 0; k < iterations; ++k) {
    apply_phase_oracle(s, s.reg("Q"), p.marked);
    apply_diffusion(s, s.reg("Q"));
  }
  return s;
}

double grover_run(const GroverProblem& p, int iterations) {
  const StateVector s = grover_state(p, iterations);
  double prob = 0.0;
  for (auto m : p.marked) prob += std::norm(s[m]);
  return prob;
}

int optimal_rounds_for_angle(double theta) {
  if (theta <= 0.0) return 0;
  const int kmax = static_cast<int>(std::ceil(kPi / (2.0 * std::sin(theta)))) + 1;
  int best_k = 0;
  double best = std::pow(std::sin(theta), 2);
  for (int k = 1; k <= kmax; ++k) {
    const double p = std::pow(std::sin((2.0 * k + 1.0) * theta), 2);
    if (p > best + 1e-12) {
      best = p;
      best_k = k;
    }
  }
  return best_k;
}

int optimal_iterations(std::uint64_t N, std::uint64_t M) {
  if (M < 1 || M >= N) throw InputError("optimal_iterations needs 1 <= M < N");
  const double ratio = static_cast<double>(M) / static_cast<double>(N);
  const double theta = std::asin(std::sqrt(ratio));
  const int kmax = static_cast<int>(std::ceil(kPi * std::sqrt(1.0 / ratio)));
  int best_k = 0;
  double best = ratio;
  for (int k = 1; k <= kmax; ++k) {
    const double p = std::pow(std::sin((2.0 * k + 1.0) * theta), 2);
    if (p > best + 1e-12) {
      best = p;
      best_k = k;
    }
  }
  return best_k;
}

Projector basis_projector(std::function<bool(std::uint64_t)> good) {
  return [good = std::move(good)](std::vector<Complex>& amps) {
    for (std::uint64_t i = 0; i < amps.size(); ++i)
      if (!good(i)) amps[i] = 0.0;
  };
}

Projector matrix_projector(const ComplexMatrix& p) {
  if (max_norm(p * p - p) > 1e-10 || max_asymmetry(p) > 1e-10) {
    throw InputError("projector must be idempotent and Hermitian");
  }
  return [p](std::vector<Complex>& amps) {
    if (static_cast<std::uint64_t>(p.rows()) != amps.size()) throw InputError("projector dimension mismatch");
    Eigen::Map<CVector> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
    const CVector out = p * v;
    v = out;
  };
}

namespace {
double good_weight(const std::vector<Complex>& amps, const Projector& good) {
  std::vector<Complex> g = amps;
  good(g);
  double w = 0.0;
  for (const auto& a : g) w += std::norm(a);
  return w;
}
}  // namespace

AmplificationResult amplitude_amplify(const StateVector& prepared, const Projector& good, int rounds) {
  StateVector psi = prepared;
  psi.normalise();
  const double p0 = good_weight(psi.amplitudes(), good);
  if (p0 < 1e-14) throw AlgorithmError("amplitude amplification: initial success probability is zero");
  const int r = rounds >= 0 ? rounds : optimal_rounds_for_angle(std::asin(std::sqrt(std::min(1.0, p0))));
  StateVector phi = psi;
  auto& a = phi.amplitudes();
  const auto& base = psi.amplitudes();
  for (int k = 0; k < r; ++k) {
    // I - 2P
    std::vector<Complex> g = a;
    good(g);
    for (std::uint64_t i = 0; i < a.size(); ++i) a[i] -= 2.0 * g[i];
    // 2|psi><psi| - I
    Complex ov(0.0, 0.0);
    for (std::uint64_t i = 0; i < a.size(); ++i) ov += std::conj(base[i]) * a[i];
    for (std::uint64_t i = 0; i < a.size(); ++i) a[i] = 2.0 * ov * base[i] - a[i];
  }
  AmplificationResult res{phi, good_weight(phi.amplitudes(), good), p0, r};
  return res;
}

}  // namespace qlsim
