#include "qlsim/hhl.hpp"

#include <algorithm>
#include <cmath>

#include "qlsim/circuits.hpp"
#include "qlsim/hamsim.hpp"
#include "qlsim/qram.hpp"

namespace qlsim {

void FilterFunctionParams::validate() const {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InputError("condition number kappa must be >= 1");
  if (!(c > 0.0)) throw InputError("rotation normalisation constant must be positive");
}

namespace {
// Position of lambda inside the interpolation band [1/kappa', 1/kappa), in [0, 1).
double band_position(double lambda, const FilterFunctionParams& p) {
  const double lo = 1.0 / p.kappa_prime();
  const double hi = 1.0 / p.kappa;
  return (lambda - lo) / (hi - lo);
}
}  // namespace

double filter_f(double lambda, const FilterFunctionParams& p) {
  p.validate();
  if (!(lambda > 0.0)) throw InputError("filter functions take lambda > 0");
  if (lambda >= 1.0 / p.kappa) return p.c / (2.0 * p.kappa * lambda);
  if (lambda < 1.0 / p.kappa_prime()) return 0.0;
  return 0.5 * std::sin(0.5 * kPi * band_position(lambda, p));
}

double filter_g(double lambda, const FilterFunctionParams& p) {
  p.validate();
  if (!(lambda > 0.0)) throw InputError("filter functions take lambda > 0");
  if (lambda >= 1.0 / p.kappa) return 0.0;
  if (lambda < 1.0 / p.kappa_prime()) return 0.5;
  return 0.5 * std::cos(0.5 * kPi * band_position(lambda, p));
}

std::array<double, 3> filter_vector(double lambda, const FilterFunctionParams& p) {
  const double f = filter_f(lambda, p);
  const double g = filter_g(lambda, p);
  return {std::sqrt(std::max(0.0, 1.0 - f * f - g * g)), f, g};
}

LipschitzCheck lipschitz_check(double lambda1, double lambda2, const FilterFunctionParams& p) {
  const auto h1 = filter_vector(lambda1, p);
  const auto h2 = filter_vector(lambda2, p);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) d2 += (h1[static_cast<std::size_t>(i)] - h2[static_cast<std::size_t>(i)]) *
                                    (h1[static_cast<std::size_t>(i)] - h2[static_cast<std::size_t>(i)]);
  LipschitzCheck out;
  out.lhs = std::sqrt(d2);
  out.rhs = 0.5 * kPi * p.kappa * std::abs(lambda1 - lambda2);
  out.pass = out.lhs <= out.rhs + 1e-15;
  return out;
}

void HhlConfig::validate() const {
  filter.validate();
  if (t < 2) throw InputError("clock needs at least 2 qubits");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InputError("t0 must be positive");
  if (evolution == EvolutionMethod::trotter && trotter_steps < 1) throw InputError("Trotter step count must be >= 1");
}

StateVector clock_initial_state(std::uint64_t T) {
  if (T < 2 || !is_power_of_two(T)) throw InputError("clock size T must be a power of two >= 2");
  RegisterLayout l;
  l.add("C", ceil_log2(T));
  std::vector<Complex> amps(T);
  const double scale = std::sqrt(2.0 / static_cast<double>(T));
  for (std::uint64_t tau = 0; tau < T; ++tau) {
    const std::uint64_t mirrored = std::min(tau, T - 1 - tau);
    amps[tau] = scale * std::sin(kPi * (static_cast<double>(mirrored) + 0.5) / static_cast<double>(T));
  }
  return StateVector(l, std::move(amps));
}

double clock_eigenvalue(std::uint64_t k, std::uint64_t T, double t0) {
  const double kk = k < T / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(T);
  return 2.0 * kPi * kk / t0;
}

void check_admissible_spectrum(const HermitianOperator& a, double kappa, bool allow_zero) {
  const auto d = eig_hermitian(a);
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    const double mag = std::abs(d.eigenvalues(i));
    if (allow_zero && mag < 1e-12) continue;
    if (mag < 1.0 / kappa - 1e-9 || mag > 1.0 + 1e-9) {
      throw InputError("eigenvalue " + std::to_string(d.eigenvalues(i)) + " lies outside the admissible band [" +
                       std::to_string(1.0 / kappa) + ", 1] in absolute value; rescale A or raise kappa");
    }
  }
}

namespace {

RegisterLayout hhl_layout(int t, int n) {
  RegisterLayout l;
  l.add("C", t).add("I", n).add("S", 2);
  return l;
}

constexpr std::uint64_t kWell = 1;  // S = 01
constexpr std::uint64_t kIll = 2;   // S = 10

void prepare_clock(StateVector& s, const Register& clock, ClockWindow window) {
  if (window == ClockWindow::uniform) {
    ComplexMatrix h(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    for (int q = 0; q < clock.width; ++q) apply_unitary(s, h, clock.qubit(q));
    return;
  }
  // Householder reflection exchanging |0> and the clock state; its own inverse.
  const StateVector psi0 = clock_initial_state(clock.dim());
  CVector v = -to_cvector(psi0);
  v(0) += 1.0;
  apply_reflection(s, v, clock);
}

ComplexMatrix evolution_unitary(const HermitianOperator& a, const HhlConfig& cfg) {
  const double step = cfg.t0 / static_cast<double>(cfg.clock_size());
  if (cfg.evolution == EvolutionMethod::exact) return matrix_exponential_exact(a, -step);
  TrotterPlan plan;
  plan.terms = one_sparse_decompose(a);
  plan.t = -step;
  plan.m = cfg.trotter_steps;
  return trotter_evolve(plan);
}

void load_input(StateVector& s, const Register& reg, const CVector& b) {
  bool real = true;
  for (Eigen::Index i = 0; i < b.size(); ++i) real = real && b(i).imag() == 0.0;
  if (real) {
    std::vector<double> x(static_cast<std::size_t>(b.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) x[static_cast<std::size_t>(i)] = b(i).real();
    apply_loader(build_tree(x), s, reg);
  } else {
    apply_unitary(s, unitary_with_first_column(b.normalized()), reg);
  }
}

std::vector<ComplexMatrix> filter_gates(const HhlConfig& cfg, std::uint64_t* rotations) {
  const std::uint64_t T = cfg.clock_size();
  std::vector<ComplexMatrix> gates(T);
  *rotations = 0;
  for (std::uint64_t k = 0; k < T; ++k) {
    const double lam = clock_eigenvalue(k, T, cfg.t0);
    double f = 0.0, g = 0.5;
    if (lam != 0.0) {
      const auto h = filter_vector(std::abs(lam), cfg.filter);
      f = lam < 0.0 ? -h[1] : h[1];
      g = h[2];
    }
    CVector col(4);
    col << std::sqrt(std::max(0.0, 1.0 - f * f - g * g)), f, g, 0.0;
    gates[k] = unitary_with_first_column(col);
    ++*rotations;
  }
  return gates;
}

}  // namespace

HhlPrepared hhl_prepare(const HermitianOperator& a, const CVector& b, const HhlConfig& cfg) {
  cfg.validate();
  if (b.size() != a.dim()) throw InputError("b length does not match A");
  if (b.norm() == 0.0) throw InputError("b must be nonzero");
  check_admissible_spectrum(a, cfg.filter.kappa, cfg.allow_zero_eigenvalues);

  const RegisterLayout layout = hhl_layout(cfg.t, a.qubits());
  StateVector s = init_basis(layout, 0);
  const Register& C = s.reg("C");
  const Register& I = s.reg("I");
  const Register& S = s.reg("S");

  load_input(s, I, b);
  prepare_clock(s, C, cfg.window);
  const ComplexMatrix u = evolution_unitary(a, cfg);
  apply_controlled_powers(s, C, I, u);
  inverse_qft(s, C);

  HhlPrepared out{s, {}, 2 * static_cast<std::uint64_t>(cfg.t), 0};
  apply_multiplexed(out.state, C, S, filter_gates(cfg, &out.filter_rotations));
  const auto flags = register_probabilities(out.state, S);
  out.flags = {flags[0], flags[kWell], flags[kIll]};

  qft(out.state, C);
  apply_controlled_powers(out.state, C, I, u, true);
  prepare_clock(out.state, C, cfg.window);
  return out;
}

namespace {

double entanglement_entropy_bits(const StateVector& s, const Register& clock, const Register& input,
                                 std::uint64_t flag_index) {
  const std::uint64_t T = clock.dim();
  const std::uint64_t N = input.dim();
  ComplexMatrix m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N));
  const Register& S = s.reg("S");
  for (std::uint64_t c = 0; c < T; ++c)
    for (std::uint64_t i = 0; i < N; ++i) {
      std::uint64_t idx = s.with_value(0, clock, c);
      idx = s.with_value(idx, input, i);
      idx = s.with_value(idx, S, flag_index);
      m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = s[idx];
    }
  const ComplexMatrix rho = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const double total = es.eigenvalues().sum();
  double h = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i) / total;
    if (p > 1e-300) h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

}  // namespace

HhlResult hhl_solve(const HermitianOperator& a, const CVector& b, const HhlConfig& cfg) {
  HhlPrepared prep = hhl_prepare(a, b, cfg);
  const StateVector& s = prep.state;
  const Register& C = s.reg("C");
  const Register& I = s.reg("I");
  const Register& S = s.reg("S");

  SolveReport rep;
  rep.flags = prep.flags;
  rep.qubits = s.num_qubits();
  rep.controlled_evolutions = prep.controlled_evolutions;
  rep.filter_rotations = prep.filter_rotations;
  rep.success_probability = register_probabilities(s, S)[kWell];
  if (rep.success_probability < 1e-14) throw AlgorithmError("postselection on the well flag has zero probability");

  if (cfg.mode == PostselectMode::repeat_until_success) {
    const auto budget = static_cast<std::uint64_t>(std::ceil(64.0 * cfg.filter.kappa * cfg.filter.kappa));
    Rng rng(cfg.seed);
    std::bernoulli_distribution draw(std::min(1.0, rep.success_probability));
    bool ok = false;
    while (!ok && rep.attempts < budget) {
      ++rep.attempts;
      ok = draw(rng);
    }
    if (!ok) {
      throw AlgorithmError("repeat-until-success exhausted its budget of " + std::to_string(budget) +
                           " attempts (success probability " + std::to_string(rep.success_probability) + ")");
    }
  }

  StateVector post = s;
  if (cfg.mode == PostselectMode::amplitude_amplify) {
    const int n = s.num_qubits();
    const int sh = n - S.start - S.width;
    const auto amp = amplitude_amplify(
        s, basis_projector([sh](std::uint64_t i) { return ((i >> sh) & 3U) == kWell; }), cfg.amplification_rounds);
    rep.amplification_rounds = amp.rounds;
    rep.amplified_probability = amp.probability;
    post = amp.state;
  }
  post = measure_postselect(post, S, kWell).first;

  // Oracle direction.
  const SpectralDecomposition eig = eig_hermitian(a);
  const CVector bn = b.normalized();
  const CVector x = (cfg.allow_zero_eigenvalues ? CVector(pseudoinverse(a.matrix()) * bn)
                                                : classical_solve(a.matrix(), bn))
                        .normalized();

  Complex overlap(0.0);
  double clock_zero_weight = 0.0;
  for (std::uint64_t i = 0; i < I.dim(); ++i) {
    std::uint64_t idx = post.with_value(post.with_value(0, I, i), S, kWell);
    overlap += std::conj(x(static_cast<Eigen::Index>(i))) * post[idx];
    clock_zero_weight += std::norm(post[idx]);
  }
  rep.fidelity = std::min(1.0, std::abs(overlap));
  rep.clock_residual = std::max(0.0, 1.0 - clock_zero_weight);
  rep.clock_entropy = entanglement_entropy_bits(post, C, I, kWell);

  CVector xt = slice_register(post, I, post.with_value(0, S, kWell));
  RegisterLayout il;
  il.add("I", I.width);
  StateVector solution = init_basis(il, 0);
  if (xt.norm() > 0.0) {
    xt.normalize();
    rep.conditional_fidelity = std::min(1.0, std::abs(x.dot(xt)));
    rep.re_distance = std::sqrt(std::max(0.0, 2.0 * (1.0 - x.dot(xt).real())));
    const CVector ax = a.matrix() * xt;
    const Complex c = ax.squaredNorm() > 0.0 ? ax.dot(bn) / ax.squaredNorm() : Complex(0.0);
    rep.residual = (c * ax - bn).norm();
    solution = StateVector(il, std::vector<Complex>(xt.data(), xt.data() + xt.size()));
  }

  // Analytic postselection probability and grid test.
  const CVector beta = eig.vectors.adjoint() * bn;
  const std::uint64_t T = cfg.clock_size();
  rep.representable = true;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double lam = eig.eigenvalues(j);
    if (lam != 0.0 && std::abs(lam) >= 1e-12) {
      rep.predicted_probability += std::norm(beta(j)) * std::pow(filter_f(std::abs(lam), cfg.filter), 2);
    }
    const double k = lam * cfg.t0 / (2.0 * kPi);
    if (std::abs(k - std::round(k)) > 1e-9 || std::abs(std::round(k)) >= static_cast<double>(T / 2)) {
      rep.representable = false;
    }
  }

  return HhlResult{std::move(post), std::move(solution), rep};
}

NonHermitianResult solve_nonhermitian(const ComplexMatrix& a, const CVector& b, const HhlConfig& cfg) {
  if (a.rows() == 0 || a.cols() == 0) throw InputError("matrix must be non-empty");
  if (b.size() != a.rows()) throw InputError("b length must equal the number of rows of A");
  const double scale = spectral_norm(a);
  if (scale == 0.0) throw InputError("matrix is zero");
  const HermitianOperator h = hermitian_dilation(a / scale);
  CVector padded = CVector::Zero(h.dim());
  padded.head(b.size()) = b;

  HhlConfig c = cfg;
  c.allow_zero_eigenvalues = true;
  const HhlResult r = hhl_solve(h, padded, c);

  NonHermitianResult out;
  out.scale = scale;
  out.report = r.report;
  const CVector full = to_cvector(r.solution);
  out.solution = full.segment(a.rows(), a.cols());
  const double n = out.solution.norm();
  if (n > 0.0) out.solution /= n;
  const CVector oracle = pseudoinverse(a) * b;
  out.fidelity = oracle.norm() > 0.0 ? std::min(1.0, std::abs(oracle.normalized().dot(out.solution))) : 0.0;
  return out;
}

std::vector<InfidelityRecord> infidelity_scaling_experiment(const HermitianOperator& a, const CVector& b,
                                                            const std::vector<double>& t0_grid, HhlConfig cfg) {
  std::vector<InfidelityRecord> out;
  for (double t0 : t0_grid) {
    cfg.t0 = t0;
    const auto r = hhl_solve(a, b, cfg);
    out.push_back({t0, std::max(0.0, 1.0 - r.report.fidelity)});
  }
  return out;
}

}  // namespace qlsim
