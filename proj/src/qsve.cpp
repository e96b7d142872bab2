#include "qlsim/qsve.hpp"

#include <algorithm>
#include <cmath>

#include "qlsim/circuits.hpp"
#include "qlsim/qram.hpp"

namespace qlsim {

namespace {

bool is_real(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i).imag() != 0.0) return false;
  return true;
}

// |A_i> for one row: the qRAM loader for real rows, direct normalisation otherwise.
CVector row_state(const CVector& row) {
  if (is_real(row)) {
    std::vector<double> x(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) x[static_cast<std::size_t>(j)] = row(j).real();
    return to_cvector(qram_state(x, "J"));
  }
  return row.conjugate() / row.norm();
}

void load_vector(StateVector& s, const Register& reg, const CVector& v) {
  if (is_real(v)) {
    std::vector<double> x(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) x[static_cast<std::size_t>(i)] = v(i).real();
    apply_loader(build_tree(x), s, reg);
  } else {
    apply_unitary(s, unitary_with_first_column(v.normalized()), reg);
  }
}

CVector pad_to(const CVector& v, Eigen::Index n) {
  if (v.size() > n) throw InputError("input vector is longer than the column space");
  CVector out = CVector::Zero(n);
  out.head(v.size()) = v;
  return out;
}

}  // namespace

ComplexMatrix QsveFactorisation::walk() const {
  const Eigen::Index d = m.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  return (2.0 * m * m.adjoint() - id) * (2.0 * n * n.adjoint() - id);
}

QsveFactorisation build_factorisation(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw InputError("matrix must be non-empty");
  if (!a.allFinite()) throw InputError("matrix entries must be finite");
  QsveFactorisation f;
  f.rows = a.rows();
  f.cols = a.cols();
  f.row_qubits = std::max(1, ceil_log2(static_cast<std::uint64_t>(a.rows())));
  f.col_qubits = std::max(1, ceil_log2(static_cast<std::uint64_t>(a.cols())));
  const Eigen::Index mr = Eigen::Index{1} << f.row_qubits;
  const Eigen::Index nc = Eigen::Index{1} << f.col_qubits;
  f.a = ComplexMatrix::Zero(mr, nc);
  f.a.topLeftCorner(a.rows(), a.cols()) = a;
  f.frobenius = f.a.norm();
  if (f.frobenius == 0.0) throw InputError("cannot factorise the zero matrix");

  f.row_norms.resize(static_cast<std::size_t>(mr));
  f.m = ComplexMatrix::Zero(mr * nc, mr);
  for (Eigen::Index i = 0; i < mr; ++i) {
    const CVector row = f.a.row(i).transpose();
    const double rn = row.norm();
    f.row_norms[static_cast<std::size_t>(i)] = rn;
    const CVector ai = rn > 0.0 ? row_state(row) : CVector(CVector::Unit(nc, 0));
    f.m.block(i * nc, i, nc, 1) = ai;
  }
  std::vector<double> weights = f.row_norms;
  const CVector af = to_cvector(qram_state(weights, "R"));
  f.n = ComplexMatrix::Zero(mr * nc, nc);
  for (Eigen::Index j = 0; j < nc; ++j)
    for (Eigen::Index i = 0; i < mr; ++i) f.n(i * nc + j, j) = af(i);
  return f;
}

int qsve_clock_qubits(double delta) {
  if (!(delta > 0.0)) throw InputError("precision delta must be positive");
  const double need = 2.0 * kPi / delta;
  int t = 1;
  while (static_cast<double>(std::uint64_t{1} << t) < need) ++t;
  return t;
}

std::uint64_t fold_phase(std::uint64_t k, std::uint64_t T) { return std::min(k, T - k); }

double sigma_from_fold(std::uint64_t fold, std::uint64_t T, double frobenius) {
  return frobenius * std::cos(kPi * static_cast<double>(fold) / static_cast<double>(T));
}

void apply_qsve(const QsveFactorisation& f, StateVector& s, const Register& clock, const Register& value,
                const Register& rows, const Register& cols) {
  if (rows.width != f.row_qubits || cols.width != f.col_qubits) throw InputError("QSVE registers do not match A");
  if (value.width < clock.width) throw InputError("value register must be at least as wide as the clock");
  PhaseEstimationConfig pe;
  pe.t = clock.width;
  pe.u = f.walk();
  const QramTree norms = build_tree(f.row_norms);
  const Register target = concat(rows, cols);
  const std::uint64_t T = clock.dim();

  apply_loader(norms, s, rows);
  phase_estimate(pe, s, clock, target);
  // value ^= fold(clock): an involution, applied by pairwise swaps.
  auto& amps = s.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const std::uint64_t fold = fold_phase(s.value(i, clock), T);
    if (fold == 0) continue;
    const std::uint64_t j = s.with_value(i, value, s.value(i, value) ^ fold);
    if (j > i) std::swap(amps[i], amps[j]);
  }
  inverse_phase_estimate(pe, s, clock, target);
  apply_loader(norms, s, rows, true);
}

double QsveEstimate::sigma(std::uint64_t fold) const { return sigma_from_fold(fold, clock_size(), frobenius); }

double QsveEstimate::most_likely_sigma() const {
  const auto it = std::max_element(fold_probabilities.begin(), fold_probabilities.end());
  return sigma(static_cast<std::uint64_t>(it - fold_probabilities.begin()));
}

double QsveEstimate::sample(Rng& rng) const {
  std::discrete_distribution<std::size_t> d(fold_probabilities.begin(), fold_probabilities.end());
  return sigma(d(rng));
}

QsveEstimate qsve_estimate_with_clock(const QsveFactorisation& f, const CVector& alpha, int t) {
  const Eigen::Index nc = Eigen::Index{1} << f.col_qubits;
  const CVector in = pad_to(alpha, nc);
  if (in.norm() == 0.0) throw InputError("QSVE input must be nonzero");
  RegisterLayout l;
  l.add("K", t).add("R", f.row_qubits).add("J", f.col_qubits);
  StateVector s = init_basis(l, 0);
  load_vector(s, s.reg("J"), in);
  apply_loader(build_tree(f.row_norms), s, s.reg("R"));
  PhaseEstimationConfig pe;
  pe.t = t;
  pe.u = f.walk();
  phase_estimate(pe, s, s.reg("K"), concat(s.reg("R"), s.reg("J")));

  QsveEstimate out;
  out.t = t;
  out.frobenius = f.frobenius;
  const std::uint64_t T = out.clock_size();
  out.fold_probabilities.assign(T / 2 + 1, 0.0);
  const auto p = register_probabilities(s, s.reg("K"));
  for (std::uint64_t k = 0; k < T; ++k) out.fold_probabilities[fold_phase(k, T)] += p[k];
  return out;
}

QsveEstimate qsve_estimate(const QsveFactorisation& f, const CVector& alpha, double delta) {
  return qsve_estimate_with_clock(f, alpha, qsve_clock_qubits(delta));
}

void QlssConfig::validate() const {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InputError("kappa must be >= 1");
  if (t < 2) throw InputError("QLSS needs at least 2 clock qubits");
  if (gamma < 0.0) throw InputError("rotation scale gamma must be non-negative");
  if (require_precision && delta() > 1.0 / (2.0 * kappa) + 1e-12) {
    throw InputError("clock too small: 2 pi / T = " + std::to_string(delta()) + " exceeds 1/(2 kappa) = " +
                     std::to_string(1.0 / (2.0 * kappa)));
  }
}

namespace {

struct PaddedPair {
  QsveFactorisation b;  // A
  QsveFactorisation c;  // A + mu I
};

ComplexMatrix pad_block(const ComplexMatrix& core, double target_frobenius, bool pad) {
  if (!pad) return core;
  const Eigen::Index n = core.rows();
  const double mass = target_frobenius * target_frobenius - core.squaredNorm();
  if (mass < -1e-10) throw InputError("requested Frobenius norm is below that of the matrix itself");
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = core;
  const double p = std::sqrt(std::max(0.0, mass) / static_cast<double>(n));
  out.bottomRightCorner(n, n) = p * ComplexMatrix::Identity(n, n);
  return out;
}

PaddedPair padded_pair(const HermitianOperator& a, const QlssConfig& cfg) {
  const bool pad = cfg.frobenius_b > 0.0 || cfg.frobenius_c > 0.0;
  const ComplexMatrix shifted = a.matrix() + cfg.mu() * ComplexMatrix::Identity(a.dim(), a.dim());
  const double fb = cfg.frobenius_b > 0.0 ? cfg.frobenius_b : a.matrix().norm();
  const double fc = cfg.frobenius_c > 0.0 ? cfg.frobenius_c : shifted.norm();
  return {build_factorisation(pad_block(a.matrix(), fb, pad)), build_factorisation(pad_block(shifted, fc, pad))};
}

struct QlssRun {
  StateVector post;
  double success = 0.0;
  double tie_weight = 0.0;
};

QlssRun run_qlss(const PaddedPair& pp, const CVector& b, const QlssConfig& cfg, int t) {
  RegisterLayout l;
  l.add("K", t).add("B", t).add("Cv", t).add("R", pp.b.row_qubits).add("J", pp.b.col_qubits).add("anc", 1);
  StateVector s = init_basis(l, 0);
  const Register& K = s.reg("K");
  const Register& B = s.reg("B");
  const Register& Cv = s.reg("Cv");
  const Register& R = s.reg("R");
  const Register& J = s.reg("J");
  const Register& anc = s.reg("anc");
  const std::uint64_t T = std::uint64_t{1} << t;

  load_vector(s, J, pad_to(b, Eigen::Index{1} << pp.b.col_qubits));
  apply_qsve(pp.b, s, K, B, R, J);
  apply_qsve(pp.c, s, K, Cv, R, J);

  QlssRun run{s, 0.0, 0.0};
  StateVector& st = run.post;
  for (std::uint64_t i = 0; i < st.size(); ++i) {
    const double sb = sigma_from_fold(st.value(i, B), T, pp.b.frobenius);
    const double sc = sigma_from_fold(st.value(i, Cv), T, pp.c.frobenius);
    if (std::abs(sb - sc) <= 1e-12) {
      run.tie_weight += std::norm(st[i]);
    } else if (sb > sc) {
      st[i] = -st[i];
    }
  }
  apply_qsve(pp.c, st, K, Cv, R, J);

  const double gamma = cfg.rotation_scale();
  controlled_rotation_by_register(
      st, B,
      [&](std::uint64_t fold) {
        const double sigma = sigma_from_fold(fold, T, pp.b.frobenius);
        if (sigma <= 1e-12) return 0.5 * kPi;
        return std::acos(std::min(1.0, gamma / sigma));
      },
      anc);
  apply_qsve(pp.b, st, K, B, R, J);

  auto [post, p] = measure_postselect(st, anc, 0);
  run.post = std::move(post);
  run.success = p;
  return run;
}

}  // namespace

QlssResult qlss_solve(const HermitianOperator& a, const CVector& b, const QlssConfig& cfg) {
  cfg.validate();
  if (b.size() != a.dim()) throw InputError("b length does not match A");
  if (b.norm() == 0.0) throw InputError("b must be nonzero");
  const auto eig = eig_hermitian(a);
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double mag = std::abs(eig.eigenvalues(i));
    if (mag < 1.0 / cfg.kappa - 1e-9 || mag > 1.0 + 1e-9)
      throw InputError("spectrum of A must lie in [-1, -1/kappa] U [1/kappa, 1]");
  }
  const PaddedPair pp = padded_pair(a, cfg);
  const CVector bn = b.normalized();

  QlssResult out;
  int t = cfg.t;
  QlssRun run = run_qlss(pp, bn, cfg, t);
  while (run.tie_weight > 1e-12 && out.report.retries < cfg.max_retries) {
    ++out.report.retries;
    ++t;
    run = run_qlss(pp, bn, cfg, t);
  }
  out.report.t_used = t;
  out.report.tie_weight = run.tie_weight;
  out.report.success_probability = run.success;
  out.report.qubits = run.post.num_qubits();

  const StateVector& post = run.post;
  const CVector slice = slice_register(post, post.reg("J"), 0);
  const CVector x = classical_solve(a.matrix(), bn).normalized();
  const CVector xp = pad_to(x, slice.size());
  out.report.fidelity = std::min(1.0, std::abs(xp.dot(slice)));
  out.solution = slice.head(a.dim());
  if (out.solution.norm() > 0.0) {
    out.solution.normalize();
    out.report.re_distance = std::sqrt(std::max(0.0, 2.0 * (1.0 - x.dot(out.solution).real())));
  }
  const CVector beta = eig.vectors.adjoint() * bn;
  const double gamma = cfg.rotation_scale();
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    out.report.predicted_probability += std::norm(beta(j)) * std::pow(gamma / std::abs(eig.eigenvalues(j)), 2);
  return out;
}

std::vector<SignFlag> qlss_sign_flags(const HermitianOperator& a, const QlssConfig& cfg) {
  cfg.validate();
  const PaddedPair pp = padded_pair(a, cfg);
  const auto eig = eig_hermitian(a);
  std::vector<SignFlag> out;
  for (Eigen::Index j = 0; j < eig.eigenvalues.size(); ++j) {
    SignFlag f;
    f.lambda = eig.eigenvalues(j);
    const CVector v = eig.vectors.col(j);
    f.sigma_b = qsve_estimate_with_clock(pp.b, v, cfg.t).most_likely_sigma();
    f.sigma_c = qsve_estimate_with_clock(pp.c, v, cfg.t).most_likely_sigma();
    f.tie = std::abs(f.sigma_b - f.sigma_c) <= 1e-12;
    f.flag = !f.tie && f.sigma_b > f.sigma_c;
    out.push_back(f);
  }
  return out;
}

std::vector<QlssExactConfig> qlss_exact_configurations(int t) {
  if (t < 2 || t > 8) throw InputError("exact configuration search supports 2 <= t <= 8");
  const int T = 1 << t;
  auto c = [T](int k) { return std::cos(kPi * k / T); };
  std::vector<QlssExactConfig> out;
  for (int k1 = 1; k1 < T / 2; ++k1)
    for (int k2 = 1; k2 < T / 2; ++k2) {
      const double c1 = c(k1), c2 = c(k2);
      if (std::abs(c1 - c2) < 1e-9 || 2.0 * (c1 * c1 + c2 * c2) > 1.0 + 1e-12) continue;
      for (int k3 = 1; k3 < T / 2; ++k3)
        for (int k4 = 1; k4 < T / 2; ++k4) {
          const double c3 = c(k3), c4 = c(k4);
          if (2.0 * (c3 * c3 + c4 * c4) > 1.0 + 1e-12) continue;
          const double fc = (c1 + c2) / (c3 + c4);
          const double mu = fc * c3 - c1;
          if (mu <= 1e-9) continue;
          const double s = std::max(c1, c2);
          QlssExactConfig q;
          q.t = t;
          q.k1 = k1;
          q.k2 = k2;
          q.k3 = k3;
          q.k4 = k4;
          q.a = c1 / s;
          q.b = c2 / s;
          q.mu = mu / s;
          q.frobenius_b = 1.0 / s;
          q.frobenius_c = fc / s;
          if (std::min(q.a, q.b) < q.mu - 1e-12) continue;
          if (2.0 * kPi / T > q.mu / 2.0 + 1e-12) continue;
          out.push_back(q);
        }
    }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.mu > y.mu; });
  return out;
}

std::pair<HermitianOperator, QlssConfig> qlss_exact_instance(const QlssExactConfig& c, Rng& rng) {
  const ComplexMatrix u = random_unitary(4, rng);
  CVector d(4);
  d << c.a, c.a, -c.b, -c.b;
  ComplexMatrix a = u * d.asDiagonal() * u.adjoint();
  a = (0.5 * (a + a.adjoint())).eval();
  QlssConfig cfg;
  cfg.kappa = c.kappa();
  cfg.t = c.t;
  cfg.frobenius_b = c.frobenius_b;
  cfg.frobenius_c = c.frobenius_c;
  return {HermitianOperator(a, 1e-10), cfg};
}

}  // namespace qlsim
