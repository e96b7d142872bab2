// Acceptance checks AC1-AC14. Prints one PASS/FAIL line per criterion with
// the measured quantities; exits 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qlsim/approx.hpp"
#include "qlsim/circuits.hpp"
#include "qlsim/hamsim.hpp"
#include "qlsim/harness.hpp"
#include "qlsim/hhl.hpp"
#include "qlsim/qram.hpp"
#include "qlsim/qsve.hpp"

using namespace qlsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

HermitianOperator with_spectrum(const std::vector<double>& lams, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(lams.size());
  const ComplexMatrix u = random_unitary(n, rng);
  RVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = lams[static_cast<std::size_t>(i)];
  ComplexMatrix a = u * d.cast<Complex>().asDiagonal() * u.adjoint();
  a = (0.5 * (a + a.adjoint())).eval();
  return HermitianOperator(a, 1e-10);
}

// Uniform clock window; lambda = 1 reads out at k = T/4, so multiples of
// 4/T are exact.
HhlConfig grid_config(int t, double kappa) {
  HhlConfig c;
  c.t = t;
  c.t0 = 2.0 * kPi * static_cast<double>(std::uint64_t{1} << t) / 4.0;
  c.filter.kappa = kappa;
  c.window = ClockWindow::uniform;
  return c;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Outcome ac1_hhl_exact() {
  Rng rng(101);
  const std::vector<double> lams = {1.0, -40.0 / 64.0, 24.0 / 64.0, -16.0 / 64.0};
  double worst_fid = 1.0, worst_prob = 0.0, worst_time = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = with_spectrum(lams, rng);
    const CVector b = random_state(4, rng);
    const auto start = std::chrono::steady_clock::now();
    const auto r = hhl_solve(a, b, grid_config(8, 4.0));
    worst_time = std::max(worst_time, seconds_since(start));
    worst_fid = std::min(worst_fid, r.report.fidelity);
    worst_prob = std::max(worst_prob, std::abs(r.report.success_probability - r.report.predicted_probability));
  }
  return {worst_fid >= 1.0 - 1e-6 && worst_prob <= 1e-6 && worst_time < 10.0,
          "min fidelity " + fmt(worst_fid) + ", max |p - sum|beta f|^2| " + fmt(worst_prob) + ", max time " +
              fmt(worst_time) + " s"};
}

Outcome ac2_infidelity_scaling() {
  const auto a = generate_hermitian(4, 8.0, Definiteness::indefinite, 2024);
  Rng rng(7);
  const CVector b = random_state(4, rng);
  HhlConfig cfg;
  cfg.t = 10;
  cfg.filter.kappa = 8.0;
  cfg.window = ClockWindow::sine;
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(100.0 * std::pow(2.0, i / 2.0));
  const auto recs = infidelity_scaling_experiment(a, b, grid, cfg);
  std::vector<double> lx, ly;
  for (const auto& r : recs) {
    lx.push_back(std::log(r.t0));
    ly.push_back(std::log(r.infidelity));
  }
  const double slope = fit_slope(lx, ly);
  return {std::abs(slope + 2.0) <= 0.4, "slope " + fmt(slope) + " over t0 in [100, 1600], infidelity " +
                                            fmt(recs.front().infidelity) + " -> " + fmt(recs.back().infidelity)};
}

Outcome ac3_postselection_bound() {
  int count = 0, violations = 0;
  double worst_margin = 1e9;
  for (double kappa : {2.0, 4.0, 8.0}) {
    for (int i = 0; i < 17 && count < 50; ++i, ++count) {
      GeneratorSpec spec;
      spec.dimension = 4;
      spec.kappa = kappa;
      spec.definiteness = i % 2 == 0 ? Definiteness::positive : Definiteness::indefinite;
      spec.snap = 64;
      spec.seed = 1000 + static_cast<std::uint64_t>(count);
      const auto a = generate_hermitian(spec);
      Rng rng(spec.seed);
      const auto r = hhl_solve(a, random_state(4, rng), grid_config(8, kappa));
      const double margin = r.report.success_probability - 1.0 / (4.0 * kappa * kappa);
      worst_margin = std::min(worst_margin, margin);
      if (margin < -1e-9) ++violations;
    }
  }
  return {violations == 0 && count == 50,
          std::to_string(count) + " instances, violations " + std::to_string(violations) +
              ", min p - 1/(4 kappa^2) " + fmt(worst_margin)};
}

Outcome ac4_qpe() {
  Rng rng(4);
  double worst = 1.0;
  for (int t = 1; t <= 8; ++t) {
    const std::uint64_t T = std::uint64_t{1} << t;
    for (std::uint64_t k = 0; k < T; k += std::max<std::uint64_t>(1, T / 16)) {
      PhaseEstimationConfig cfg;
      cfg.t = t;
      cfg.u = random_unitary(2, rng);
      // U with eigenvector v1 at phase k/T.
      const ComplexMatrix v = random_unitary(2, rng);
      ComplexMatrix d = ComplexMatrix::Zero(2, 2);
      d(0, 0) = std::exp(2.0 * kPi * kI * static_cast<double>(k) / static_cast<double>(T));
      d(1, 1) = 1.0;
      cfg.u = v * d * v.adjoint();
      const auto s = phase_estimate(cfg, CVector(v.col(0)));
      worst = std::min(worst, register_probabilities(s, s.reg("C"))[k]);
    }
  }
  const std::uint64_t T = 256;
  int violations = 0, points = 0;
  for (std::uint64_t k : {0u, 3u, 100u}) {
    for (double delta = 2.0 * kPi; delta <= T / 10.0; delta += 0.01) {
      const auto a = qpe_amplitude_closed_form(0, k, delta + 2.0 * kPi * static_cast<double>(k), 1.0, T);
      ++points;
      if (std::norm(a.alpha) > 64.0 * kPi * kPi / (delta * delta)) ++violations;
    }
  }
  return {worst >= 1.0 - 1e-10 && violations == 0,
          "min exact-phase probability " + fmt(worst) + ", alpha-bound violations " + std::to_string(violations) + "/" +
              std::to_string(points)};
}

Outcome ac5_grover() {
  Rng rng(5);
  double worst = 0.0;
  int cases = 0;
  for (int n = 1; n <= 8; ++n) {
    const std::uint64_t N = std::uint64_t{1} << n;
    for (int rep = 0; rep < 4; ++rep) {
      std::uniform_int_distribution<std::uint64_t> pick_m(1, std::max<std::uint64_t>(1, N / 2));
      const std::uint64_t M = pick_m(rng);
      std::vector<std::uint64_t> all(N);
      for (std::uint64_t i = 0; i < N; ++i) all[i] = i;
      std::shuffle(all.begin(), all.end(), rng);
      GroverProblem p;
      p.n = n;
      p.marked.assign(all.begin(), all.begin() + static_cast<long>(M));
      std::sort(p.marked.begin(), p.marked.end());
      const double theta = std::asin(std::sqrt(static_cast<double>(M) / static_cast<double>(N)));
      for (int k = 0; k <= 40; k += 1 + rep) {
        worst = std::max(worst, std::abs(grover_run(p, k) - std::pow(std::sin((2 * k + 1) * theta), 2)));
        ++cases;
      }
    }
  }
  const double exact = std::abs(grover_run(GroverProblem{2, {1}}, 1) - 1.0);
  return {worst <= 1e-10 && exact <= 1e-12,
          std::to_string(cases) + " cases, max deviation " + fmt(worst) + ", N=4 M=1 k=1 error " + fmt(exact)};
}

Outcome ac6_trotter() {
  Rng rng(6);
  std::vector<double> slopes;
  bool ok = true;
  std::string text = "slopes";
  for (int trial = 0; trial < 5; ++trial) {
    TrotterPlan p;
    p.terms = {random_hermitian(4, rng), random_hermitian(4, rng)};
    p.t = 1.0;
    std::vector<double> lx, ly;
    for (int m = 16; m <= 1024; m *= 2) {
      p.m = m;
      lx.push_back(std::log(m));
      ly.push_back(std::log(trotter_error(p)));
    }
    const double s = fit_slope(lx, ly);
    ok = ok && std::abs(s + 1.0) <= 0.15;
    text += " " + fmt(s);
  }
  double commuting = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix u = random_unitary(4, rng);
    auto diag = [&](void) {
      const RVector d = random_real_vector(4, rng);
      ComplexMatrix m = u * d.cast<Complex>().asDiagonal() * u.adjoint();
      return HermitianOperator((0.5 * (m + m.adjoint())).eval());
    };
    TrotterPlan p;
    p.terms = {diag(), diag()};
    p.t = 1.0;
    p.m = 1;
    commuting = std::max(commuting, trotter_error(p));
  }
  return {ok && commuting <= 1e-10, text + "; commuting error at m=1 " + fmt(commuting)};
}

Outcome ac7_qram() {
  Rng rng(7);
  std::normal_distribution<double> g;
  double worst_load = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(128);
    for (double& v : x) v = g(rng);
    const CVector loaded = to_cvector(qram_state(x));
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err += std::norm(loaded(static_cast<Eigen::Index>(i)) - x[i] / norm);
    worst_load = std::max(worst_load, std::sqrt(err));
  }
  int violations = 0;
  const double eps = 0.01;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::size_t{1} << (1 + trial % 7);
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    const auto tree = build_tree(x);
    RegisterLayout l;
    l.add("I", tree.depth());
    const auto ideal = to_cvector(load(tree, init_basis(l, 0), l["I"]));
    const auto noisy = load_noisy(tree, init_basis(l, 0), l["I"], RotationNoise{eps, static_cast<std::uint64_t>(trial)});
    if ((to_cvector(noisy.state) - ideal).norm() > static_cast<double>(noisy.rotations) * eps) ++violations;
  }
  return {worst_load <= 1e-12 && violations == 0,
          "max 128-dim load error " + fmt(worst_load) + ", noisy-bound violations " + std::to_string(violations) + "/500"};
}

Outcome ac8_qsve() {
  Rng rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = 1 + trial % 8, n = 1 + (3 * trial + 1) % 8;
    const ComplexMatrix a = random_complex_matrix(m, n, rng);
    const auto f = build_factorisation(a);
    const ComplexMatrix w = f.walk();
    const auto d = svd(f.a);
    for (Eigen::Index i = 0; i < std::min(f.a.rows(), f.a.cols()); ++i) {
      const double s = d.sigma(i) / f.frobenius;
      const CVector nv = f.n * d.v.col(i);
      worst = std::max(worst, std::abs(nv.dot(w * nv) - (2.0 * s * s - 1.0)));
    }
  }
  const double delta = 0.02;
  int good = 0, total = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index dim = 2 + trial % 3;
    const ComplexMatrix a = random_complex_matrix(dim, dim, rng);
    const auto f = build_factorisation(a);
    const auto d = svd(a);
    const Eigen::Index i = trial % dim;
    const auto est = qsve_estimate(f, d.v.col(i), delta);
    for (int draw = 0; draw < 5; ++draw) {
      ++total;
      if (std::abs(est.sample(rng) - d.sigma(i)) <= delta * f.frobenius) ++good;
    }
  }
  const double rate = static_cast<double>(good) / total;
  return {worst <= 1e-9 && rate >= 0.9, "max walk-identity error " + fmt(worst) + ", within-bound rate " + fmt(rate)};
}

Outcome ac9_qlss() {
  const auto configs = qlss_exact_configurations(5);
  Rng rng(9);
  int flag_errors = 0, flags = 0, ties = 0;
  for (const auto& c : configs) {
    auto [a, cfg] = qlss_exact_instance(c, rng);
    for (const auto& f : qlss_sign_flags(a, cfg)) {
      ++flags;
      if (f.tie) ++ties;
      if (f.flag != (f.lambda < 0.0)) ++flag_errors;
    }
  }
  double worst_fid = 1.0;
  double worst_time = 0.0;
  for (std::size_t ci : {std::size_t{0}, configs.size() / 2, configs.size() - 1}) {
    auto [a, cfg] = qlss_exact_instance(configs[ci], rng);
    const CVector b = random_state(4, rng);
    const auto start = std::chrono::steady_clock::now();
    const auto r = qlss_solve(a, b, cfg);
    worst_time = std::max(worst_time, seconds_since(start));
    const CVector oracle = (pseudoinverse(a.matrix()) * b).normalized();
    worst_fid = std::min(worst_fid, std::abs(oracle.dot(r.solution)));
  }
  return {flag_errors == 0 && ties == 0 && worst_fid >= 1.0 - 1e-6,
          std::to_string(configs.size()) + " configurations, comparator errors " + std::to_string(flag_errors) + "/" +
              std::to_string(flags) + ", ties " + std::to_string(ties) + ", min fidelity " + fmt(worst_fid) +
              " (3 solves, max " + fmt(worst_time) + " s)"};
}

Outcome ac10_fourier() {
  bool ok = true;
  std::string text;
  for (auto [kappa, eps] : {std::pair{5.0, 0.05}, std::pair{10.0, 0.01}}) {
    const auto p = fourier_inverse_params(kappa, eps);
    const auto audit = sup_error_on_domain(p, kappa, 4000);
    ok = ok && audit.sup_error <= eps && p.total_terms() <= kFourierTermBudget;
    if (!text.empty()) text += "; ";
    text += "(" + fmt(kappa) + ", " + fmt(eps) + "): sup " + fmt(audit.sup_error) + ", J=" +
            std::to_string(p.j_terms) + " K=" + std::to_string(p.k_terms) + " terms " +
            std::to_string(p.total_terms());
  }
  return {ok, text};
}

Outcome ac11_lcu() {
  Rng rng(11);
  double worst_state = 0.0, worst_prob = 0.0;
  std::uniform_real_distribution<double> coef(0.05, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = Eigen::Index{2} << (trial % 3);
    const std::size_t terms = 1 + static_cast<std::size_t>(trial % 7);
    LcuProgram p;
    for (std::size_t i = 0; i < terms; ++i) {
      p.alpha.push_back(coef(rng));
      p.unitaries.push_back(random_unitary(dim, rng));
    }
    const CVector phi = random_state(dim, rng);
    const auto r = lcu_apply(p, phi);
    const CVector v = p.dense() * phi;
    worst_state = std::max(worst_state, (r.state - v.normalized()).norm());
    worst_prob = std::max(worst_prob, std::abs(r.success_probability - std::pow(v.norm() / p.alpha_total(), 2)));
  }
  return {worst_state <= 1e-10 && worst_prob <= 1e-10,
          "100 programs, max state error " + fmt(worst_state) + ", max probability error " + fmt(worst_prob)};
}

Outcome ac12_closeness() {
  Rng rng(12);
  int passes = 0;
  double worst_ratio = 0.0;
  std::uniform_real_distribution<double> mag(1.0, 4.0), eps(1e-4, 0.3);
  std::bernoulli_distribution sign(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> lams(4);
    for (double& l : lams) l = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    const auto a = with_spectrum(lams, rng);
    const ComplexMatrix e = random_hermitian(4, rng).matrix();
    const ComplexMatrix pert = e * (eps(rng) / spectral_norm(e));
    const CVector b = random_state(4, rng);
    const auto r = state_closeness_audit(a, HermitianOperator((a.matrix() + pert).eval(), 1e-10), b);
    if (r.pass) ++passes;
    worst_ratio = std::max(worst_ratio, r.distance / r.eps_op);
  }
  return {passes == 1000, "pass " + std::to_string(passes) + "/1000, max distance/eps " + fmt(worst_ratio)};
}

Outcome ac13_bqp() {
  Rng rng(13);
  const double bound = std::exp(-2.0) / (1.0 + std::exp(-2.0) + std::exp(-4.0));
  double worst_tv = 0.0, worst_kappa_margin = -1e9, worst_prob = 1.0, worst_period = 0.0;
  int runs = 0;
  for (int T = 1; T <= 8; ++T) {
    for (int rep = 0; rep < 3; ++rep, ++runs) {
      const auto gates = random_circuit(1 + rep % 3, T, rng);
      const auto r = bqp_reduction_experiment(gates);
      worst_tv = std::max(worst_tv, r.tv_distance);
      worst_kappa_margin = std::max(worst_kappa_margin, r.kappa - r.kappa_bound);
      worst_prob = std::min(worst_prob, r.postselection_probability);
      worst_period = std::max(worst_period, r.periodicity_error);
    }
  }
  return {worst_tv <= 1e-6 && worst_kappa_margin <= 1e-6 && worst_prob >= bound - 1e-9 && worst_period <= 1e-8,
          std::to_string(runs) + " circuits, max TV " + fmt(worst_tv) + ", max kappa - bound " +
              fmt(worst_kappa_margin) + ", min postselection " + fmt(worst_prob) + " (bound " + fmt(bound) +
              "), max |U^3T - I| " + fmt(worst_period)};
}

Outcome ac14_nonhermitian() {
  Rng rng(14);
  double worst = 1.0;
  for (int trial = 0; trial < 6; ++trial) {
    const bool wide = trial % 2 == 0;
    const Eigen::Index m = wide ? 2 : 4, n = wide ? 4 : 2;
    ComplexMatrix s = ComplexMatrix::Zero(m, n);
    s(0, 0) = 1.0;
    s(1, 1) = 0.5;
    const ComplexMatrix a = random_unitary(m, rng) * s * random_unitary(n, rng).adjoint();
    const CVector b = random_state(m, rng);
    const auto r = solve_nonhermitian(a, b, grid_config(8, 2.0));
    const CVector oracle = (pseudoinverse(a) * b).normalized();
    worst = std::min(worst, std::abs(oracle.dot(r.solution)));
  }
  return {worst >= 1.0 - 1e-6, "2x4 and 4x2 instances, min fidelity vs pseudoinverse " + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 HHL exact spectrum", ac1_hhl_exact},
      {"AC2 infidelity scaling", ac2_infidelity_scaling},
      {"AC3 postselection bound", ac3_postselection_bound},
      {"AC4 QPE exactness and alpha bound", ac4_qpe},
      {"AC5 Grover closed form", ac5_grover},
      {"AC6 Trotter order", ac6_trotter},
      {"AC7 qRAM round trip and noise bound", ac7_qram},
      {"AC8 QSVE walk identity and precision", ac8_qsve},
      {"AC9 QLSS sign recovery", ac9_qlss},
      {"AC10 Fourier inverse", ac10_fourier},
      {"AC11 LCU mechanics", ac11_lcu},
      {"AC12 4eps closeness", ac12_closeness},
      {"AC13 BQP reduction", ac13_bqp},
      {"AC14 non-Hermitian dilation", ac14_nonhermitian},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
