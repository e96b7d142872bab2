#include "qlsim/approx.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "qlsim/qram.hpp"

namespace qlsim {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

// sum_{j=0}^{J-1} sin(j theta)
double sine_sum(std::int64_t j_terms, double theta) {
  const double den = std::sin(0.5 * theta);
  if (den == 0.0) return 0.0;
  const double jd = static_cast<double>(j_terms);
  return std::sin(0.5 * (jd - 1.0) * theta) * std::sin(0.5 * jd * theta) / den;
}

// sum_{j=0}^{J-1} cos(j theta)
double cosine_sum(std::int64_t j_terms, double theta) {
  const double den = std::sin(0.5 * theta);
  const double jd = static_cast<double>(j_terms);
  if (den == 0.0) return jd;
  return std::cos(0.5 * (jd - 1.0) * theta) * std::sin(0.5 * jd * theta) / den;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void FourierInverseParams::validate() const {
  if (!(kappa >= 1.0)) throw InputError("kappa must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (j_terms < 1 || k_terms < 1) throw InputError("J and K must be >= 1");
  if (!(delta_y > 0.0 && delta_z > 0.0)) throw InputError("step sizes must be positive");
}

FourierInverseParams fourier_inverse_schedule(double kappa, double epsilon) {
  FourierInverseParams p;
  p.kappa = kappa;
  p.epsilon = epsilon;
  if (!(kappa >= 1.0)) throw InputError("kappa must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  const double log_term = std::max(1.0, std::log(kappa / epsilon));
  p.delta_y = 0.5 * std::sqrt(epsilon);
  p.j_terms = static_cast<std::int64_t>(std::ceil(4.0 * kappa * std::sqrt(log_term / epsilon)));
  p.delta_z = 1.0 / (kappa * std::sqrt(log_term));
  p.k_terms = static_cast<std::int64_t>(std::ceil(2.0 * std::sqrt(2.0) * kappa * log_term));
  return p;
}

FourierInverseParams fourier_inverse_params(double kappa, double epsilon, int grid_size) {
  FourierInverseParams p = fourier_inverse_schedule(kappa, epsilon);
  for (;;) {
    if (p.total_terms() > kFourierTermBudget) {
      throw ResourceError("Fourier inverse needs more than 2^20 terms (J=" + std::to_string(p.j_terms) +
                          ", K=" + std::to_string(p.k_terms) + ")");
    }
    const DomainAudit audit = sup_error_on_domain(p, kappa, grid_size);
    p.audited_error = audit.sup_error;
    if (audit.sup_error <= epsilon) return p;
    p.j_terms *= 2;
    p.k_terms *= 2;
    ++p.refinements;
  }
}

Complex evaluate_h(double x, const FourierInverseParams& p) {
  const auto k_terms = static_cast<std::size_t>(p.k_terms);
  std::vector<double> re(k_terms), im(2 * k_terms + 1, 0.0);
  for (std::int64_t k = -p.k_terms; k <= p.k_terms; ++k) {
    if (k == 0) continue;
    const double z = p.z(k);
    const double w = z * std::exp(-0.5 * z * z);
    const double theta = x * p.delta_y * z;
    // i * w * sum_j e^{-i j theta} = w * (sum_j sin(j theta) + i sum_j cos(j theta))
    im[static_cast<std::size_t>(k + p.k_terms)] = w * cosine_sum(p.j_terms, theta);
    if (k > 0) re[static_cast<std::size_t>(k - 1)] = 2.0 * w * sine_sum(p.j_terms, theta);
  }
  const double scale = kInvSqrt2Pi * p.delta_y * p.delta_z;
  return {scale * pairwise_sum(re.data(), re.size()), scale * pairwise_sum(im.data(), im.size())};
}

double evaluate_h_real(double x, const FourierInverseParams& p) { return evaluate_h(x, p).real(); }

double h_y_truncated_limit(double x, double y_max) {
  if (x == 0.0) return 0.0;
  return -std::expm1(-0.5 * x * x * y_max * y_max) / x;
}

DomainAudit sup_error_on_domain(const FourierInverseParams& p, double kappa, int grid_size, int threads) {
  if (grid_size < 1000) throw InputError("audit grid needs at least 1000 points");
  if (!(kappa >= 1.0)) throw InputError("kappa must be >= 1");
  const auto n = static_cast<std::size_t>(grid_size);
  DomainAudit audit;
  audit.grid.resize(n);
  audit.errors.resize(n);
  std::vector<double> neg_errors(n), imag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 1.0 + (kappa - 1.0) * static_cast<double>(i) / static_cast<double>(n - 1);
    audit.grid[i] = 1.0 / u;
  }
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double x = audit.grid[i];
      const Complex hp = evaluate_h(x, p);
      const Complex hn = evaluate_h(-x, p);
      audit.errors[i] = std::abs(hp - 1.0 / x);
      neg_errors[i] = std::abs(hn + 1.0 / x);
      imag[i] = std::max(std::abs(hp.imag()), std::abs(hn.imag()));
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<int>(resolve_threads(threads), grid_size));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  std::size_t worst = 0;
  double worst_sign = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (audit.errors[i] > audit.sup_error) {
      audit.sup_error = audit.errors[i];
      worst = i;
      worst_sign = 1.0;
    }
    if (neg_errors[i] > audit.sup_error) {
      audit.sup_error = neg_errors[i];
      worst = i;
      worst_sign = -1.0;
    }
    audit.max_imaginary = std::max(audit.max_imaginary, imag[i]);
  }
  audit.worst_x = worst_sign * audit.grid[worst];
  audit.worst_at_edge = worst == n - 1;
  return audit;
}

ComplexMatrix apply_h_spectral(const HermitianOperator& a, const FourierInverseParams& p) {
  const SpectralDecomposition d = eig_hermitian(a);
  CVector values(a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) values(i) = evaluate_h(d.eigenvalues(i), p);
  return d.vectors * values.asDiagonal() * d.vectors.adjoint();
}

double LcuProgram::alpha_total() const {
  double s = 0.0;
  for (double a : alpha) s += a;
  return s;
}

ComplexMatrix LcuProgram::dense() const {
  validate();
  ComplexMatrix v = ComplexMatrix::Zero(unitaries[0].rows(), unitaries[0].cols());
  for (std::size_t i = 0; i < size(); ++i) v += alpha[i] * unitaries[i];
  return v;
}

void LcuProgram::validate() const {
  if (alpha.empty()) throw InputError("LCU program has no terms");
  if (alpha.size() != unitaries.size()) throw InputError("LCU coefficient and unitary counts differ");
  const Eigen::Index dim = unitaries[0].rows();
  if (dim < 2 || !is_power_of_two(static_cast<std::uint64_t>(dim))) {
    throw InputError("LCU unitaries must act on a power-of-two dimension >= 2");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) throw InputError("LCU coefficients must be positive");
    if (unitaries[i].rows() != dim || unitaries[i].cols() != dim) throw InputError("LCU unitaries differ in size");
    if (!is_unitary(unitaries[i], 1e-9)) throw InputError("LCU term " + std::to_string(i) + " is not unitary");
  }
}

LcuResult lcu_apply(const LcuProgram& program, const CVector& phi) {
  program.validate();
  const Eigen::Index dim = program.unitaries[0].rows();
  if (phi.size() != dim) throw InputError("state dimension does not match the LCU unitaries");
  if (!(phi.norm() > 0.0)) throw InputError("input state is zero");

  std::vector<double> amplitudes(program.size());
  const double total = program.alpha_total();
  for (std::size_t i = 0; i < program.size(); ++i) amplitudes[i] = std::sqrt(program.alpha[i] / total);
  const QramTree prepare = build_tree(amplitudes);

  RegisterLayout layout;
  layout.add("anc", prepare.depth()).add("S", ceil_log2(static_cast<std::uint64_t>(dim)));
  if (layout.num_qubits() > max_qubits()) throw ResourceError("LCU circuit exceeds the qubit budget");
  const Register& anc = layout["anc"];
  const Register& sys = layout["S"];

  std::vector<Complex> amps(std::uint64_t{1} << layout.num_qubits(), Complex{0.0, 0.0});
  const CVector input = phi.normalized();
  for (Eigen::Index i = 0; i < dim; ++i) amps[static_cast<std::size_t>(i)] = input(i);
  StateVector s(layout, std::move(amps));

  apply_loader(prepare, s, anc);
  std::vector<ComplexMatrix> select(anc.dim(), ComplexMatrix::Identity(dim, dim));
  for (std::size_t i = 0; i < program.size(); ++i) select[i] = program.unitaries[i];
  apply_multiplexed(s, anc, sys, select);
  apply_loader(prepare, s, anc, true);

  auto [post, probability] = measure_postselect(s, anc, 0);
  if (probability < 1e-14) throw AlgorithmError("LCU output vanishes: V|phi> is numerically zero");
  LcuResult r{slice_register(post, sys, 0), probability, anc.width, std::move(s)};
  r.state.normalize();
  return r;
}

LcuProgram fourier_lcu_program(const HermitianOperator& a, const FourierInverseParams& p, std::int64_t j_limit,
                               std::int64_t k_limit) {
  p.validate();
  if (j_limit < 2 || j_limit > p.j_terms) throw InputError("j_limit must lie in [2, J]");
  if (k_limit < 1 || k_limit > p.k_terms) throw InputError("k_limit must lie in [1, K]");
  const SpectralDecomposition d = eig_hermitian(a);
  LcuProgram program;
  CVector phases(a.dim());
  for (std::int64_t j = 1; j < j_limit; ++j) {
    for (std::int64_t k = -k_limit; k <= k_limit; ++k) {
      if (k == 0) continue;
      const double z = p.z(k);
      const double t = p.y(j) * z;
      const double sign = k > 0 ? 1.0 : -1.0;
      for (Eigen::Index i = 0; i < a.dim(); ++i) phases(i) = sign * kI * std::exp(-kI * d.eigenvalues(i) * t);
      program.alpha.push_back(kInvSqrt2Pi * p.delta_y * p.delta_z * std::abs(z) * std::exp(-0.5 * z * z));
      program.unitaries.push_back(d.vectors * phases.asDiagonal() * d.vectors.adjoint());
    }
  }
  return program;
}

ClosenessAudit state_closeness_audit(const HermitianOperator& a, const HermitianOperator& a_tilde, const CVector& b) {
  if (a.dim() != a_tilde.dim() || b.size() != a.dim()) throw InputError("dimension mismatch");
  if (!(b.norm() > 0.0)) throw InputError("b must be nonzero");
  const SpectralDecomposition d = eig_hermitian(a);
  if (d.eigenvalues.cwiseAbs().minCoeff() < 1.0 - 1e-12) {
    throw InputError("closeness audit needs every |eigenvalue| of A to be at least 1");
  }
  ClosenessAudit r;
  r.eps_op = spectral_norm(a.matrix() - a_tilde.matrix());
  if (r.eps_op >= 0.5) throw InputError("perturbation norm must be below 1/2");
  const CVector x = (a.matrix() * b).normalized();
  const CVector xt = (a_tilde.matrix() * b).normalized();
  r.distance = (x - xt).norm();
  const CVector y = classical_solve(a.matrix(), b).normalized();
  const CVector yt = classical_solve(a_tilde.matrix(), b).normalized();
  r.inverse_distance = (y - yt).norm();
  r.pass = r.distance < 4.0 * r.eps_op || r.distance == 0.0;
  return r;
}

}  // namespace qlsim
