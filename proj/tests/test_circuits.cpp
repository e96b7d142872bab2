#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlsim/circuits.hpp"

using namespace qlsim;

namespace {
StateVector on_register(const CVector& v, const std::string& name = "R") {
  RegisterLayout l;
  l.add(name, ceil_log2(static_cast<std::uint64_t>(v.size())));
  return StateVector(l, std::vector<Complex>(v.data(), v.data() + v.size()));
}

ComplexMatrix diag2(Complex a, Complex b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
}  // namespace

TEST_CASE("qft small cases") {
  RegisterLayout l1;
  l1.add("R", 1);
  auto s = init_basis(l1, 0);
  qft(s, s.reg("R"));
  CHECK(std::abs(s[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s[1] - 1.0 / std::sqrt(2.0)) < 1e-15);

  RegisterLayout l2;
  l2.add("R", 2);
  auto t = init_basis(l2, 1);
  qft(t, t.reg("R"));
  const Complex want[4] = {0.5, 0.5 * kI, -0.5, -0.5 * kI};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(t[static_cast<std::uint64_t>(k)] - want[k]) < 1e-12);
}

TEST_CASE("qft equals the dense DFT for n <= 8") {
  for (int n = 1; n <= 8; ++n) {
    const ComplexMatrix d = dft_matrix(n);
    const auto N = Eigen::Index{1} << n;
    ComplexMatrix built(N, N);
    for (Eigen::Index x = 0; x < N; ++x) {
      RegisterLayout l;
      l.add("R", n);
      auto s = init_basis(l, static_cast<std::uint64_t>(x));
      qft(s, s.reg("R"));
      built.col(x) = to_cvector(s);
    }
    CHECK(max_norm(built - d) <= 1e-12);
    CHECK(is_unitary(built, 1e-12));
  }
}

TEST_CASE("inverse_qft undoes qft on a register inside a larger state") {
  Rng rng(5);
  RegisterLayout l;
  l.add("a", 2).add("R", 8).add("b", 1);
  const CVector v = random_state(Eigen::Index{1} << 11, rng);
  StateVector s(l, std::vector<Complex>(v.data(), v.data() + v.size()));
  qft(s, s.reg("R"));
  inverse_qft(s, s.reg("R"));
  CHECK((to_cvector(s) - v).norm() <= 1e-10);
}

TEST_CASE("phase estimation on exact phases") {
  PhaseEstimationConfig cfg;
  cfg.t = 2;
  cfg.u = diag2(1.0, std::exp(2.0 * kPi * kI * 0.25));
  CVector one(2);
  one << 0, 1;
  auto s = phase_estimate(cfg, one);
  auto p = register_probabilities(s, s.reg("C"));
  CHECK(p[1] >= 1 - 1e-10);

  CVector zero(2);
  zero << 1, 0;
  s = phase_estimate(cfg, zero);
  p = register_probabilities(s, s.reg("C"));
  CHECK(p[0] >= 1 - 1e-10);

  // Superposition: each eigencomponent gets its own clock value.
  CVector sup(2);
  sup << 0.6, 0.8;
  s = phase_estimate(cfg, sup);
  CHECK(std::abs(s[0] - 0.6) < 1e-12);   // |00>_C |0>_I
  CHECK(std::abs(s[3] - 0.8) < 1e-12);   // |01>_C |1>_I
}

TEST_CASE("phase 1/3 with t = 6: most probable outcome is round(64/3)") {
  PhaseEstimationConfig cfg;
  cfg.t = 6;
  cfg.u = diag2(1.0, std::exp(2.0 * kPi * kI / 3.0));
  CVector one(2);
  one << 0, 1;
  const auto s = phase_estimate(cfg, one);
  const auto p = register_probabilities(s, s.reg("C"));
  const auto best = std::max_element(p.begin(), p.end()) - p.begin();
  CHECK(best == 21);
  // Brute-force comparison with the standard Fejer-kernel distribution.
  for (int y = 0; y < 64; ++y) {
    Complex acc(0.0);
    for (int x = 0; x < 64; ++x) acc += std::exp(2.0 * kPi * kI * static_cast<double>(x) * (1.0 / 3.0 - y / 64.0));
    CHECK(std::abs(p[static_cast<std::size_t>(y)] - std::norm(acc) / 4096.0) < 1e-12);
  }
}

TEST_CASE("closed-form QPE amplitude agrees with the direct sum") {
  Rng rng(31);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t T = 64;
    const double l = lam(rng);
    const double t0 = 40.0;
    for (std::uint64_t k = 0; k < T; ++k) {
      const auto a = qpe_amplitude_closed_form(0, k, l, t0, T);
      CHECK(std::abs(a.alpha - qpe_amplitude_direct(l, t0, T, k)) < 1e-10);
    }
  }
  // delta = 0: the sine window keeps 2 / (T sin(pi/2T))^2 on the matching k,
  // which tends to 8/pi^2 rather than 1; neighbours carry the rest.
  const auto exact = qpe_amplitude_closed_form(0, 5, 2.0 * kPi * 5.0 / 30.0, 30.0, 16);
  CHECK(std::abs(exact.delta) < 1e-12);
  CHECK(std::abs(std::norm(exact.alpha) - 2.0 / std::pow(16 * std::sin(kPi / 32), 2)) < 1e-12);
  // Half-integer offsets (delta = +-pi) split the weight evenly over two outcomes.
  const double half = 2.0 * kPi * 5.5 / 30.0;
  CHECK(std::abs(std::norm(qpe_amplitude_closed_form(0, 5, half, 30.0, 16).alpha) - 0.5) < 1e-12);
  CHECK(std::abs(std::norm(qpe_amplitude_closed_form(0, 6, half, 30.0, 16).alpha) - 0.5) < 1e-12);
}

TEST_CASE("QPE amplitudes are complete") {
  Rng rng(41);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double l = lam(rng);
    double total = 0.0;
    for (std::uint64_t k = 0; k < 64; ++k) total += std::norm(qpe_amplitude_closed_form(0, k, l, 37.0, 64).alpha);
    CHECK(std::abs(total - 1.0) <= 1e-10);
  }
}

TEST_CASE("clock distribution of a sine-window QPE matches |alpha|^2") {
  // Sine-window clock, controlled exp(i lambda tau t0 / T), inverse QFT.
  const int t = 5;
  const std::uint64_t T = 32;
  const double lambda = 0.4137;
  const double t0 = 25.0;
  RegisterLayout l;
  l.add("C", t);
  std::vector<Complex> amps(T);
  for (std::uint64_t tau = 0; tau < T; ++tau)
    amps[tau] = std::sqrt(2.0 / T) * std::sin(kPi * (tau + 0.5) / T) *
                std::exp(kI * lambda * t0 * static_cast<double>(tau) / static_cast<double>(T));
  StateVector s(l, amps);
  inverse_qft(s, s.reg("C"));
  for (std::uint64_t k = 0; k < T; ++k)
    CHECK(std::abs(s[k] - qpe_amplitude_closed_form(0, k, lambda, t0, T).alpha) < 1e-12);
}

TEST_CASE("alpha bound over a delta grid") {
  const std::uint64_t T = 256;
  int violations = 0;
  for (double delta = 2 * kPi; delta <= T / 10.0; delta += 0.01) {
    const double lambda_t0 = delta + 2 * kPi * 3;  // k = 3
    const auto a = qpe_amplitude_closed_form(0, 3, lambda_t0, 1.0, T);
    if (std::norm(a.alpha) > 64 * kPi * kPi / (delta * delta)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("controlled rotation by register value") {
  RegisterLayout l;
  l.add("V", 2).add("t", 1);
  std::vector<Complex> amps(8, 0.0);
  for (int v = 0; v < 4; ++v) amps[static_cast<std::size_t>(v << 1)] = 0.5;
  StateVector s(l, amps);
  auto z = s;
  controlled_rotation_by_register(z, z.reg("V"), [](std::uint64_t) { return 0.0; }, z.reg("t"));
  CHECK((to_cvector(z) - to_cvector(s)).norm() < 1e-15);

  auto f = s;
  controlled_rotation_by_register(f, f.reg("V"), [](std::uint64_t) { return kPi / 2; }, f.reg("t"));
  for (int v = 0; v < 4; ++v) CHECK(std::abs(f[static_cast<std::uint64_t>((v << 1) | 1)] - 0.5) < 1e-15);

  auto g = s;
  controlled_rotation_by_register(g, g.reg("V"), [](std::uint64_t v) { return std::acos(v / 4.0); }, g.reg("t"));
  for (int v = 0; v < 4; ++v) {
    CHECK(std::abs(g[static_cast<std::uint64_t>(v << 1)] - 0.5 * v / 4.0) < 1e-14);
    CHECK(std::abs(g[static_cast<std::uint64_t>((v << 1) | 1)] - 0.5 * std::sqrt(1 - v * v / 16.0)) < 1e-14);
  }
  CHECK_THROWS_AS(controlled_rotation_by_register(f, f.reg("V"), [](std::uint64_t) { return 0.0; }, f.reg("t")),
                  InputError);
}

TEST_CASE("Grover closed form") {
  GroverProblem p{2, {3}};
  CHECK(std::abs(grover_run(p, 1) - 1.0) <= 1e-12);
  GroverProblem q{5, {1, 7, 9}};
  CHECK(grover_run(q, 0) == doctest::Approx(3.0 / 32.0));
  for (int k = 0; k < 10; ++k) {
    const double theta = std::asin(std::sqrt(3.0 / 32.0));
    CHECK(std::abs(grover_run(q, k) - std::pow(std::sin((2 * k + 1) * theta), 2)) <= 1e-10);
  }
  GroverProblem r{8, {0, 50, 100, 200}};
  CHECK(grover_run(r, optimal_iterations(256, 4)) >= 0.99);
}

TEST_CASE("optimal_iterations agrees with exhaustive search") {
  CHECK(optimal_iterations(4, 1) == 1);
  CHECK(optimal_iterations(8, 4) == 0);
  for (std::uint64_t N : {16ULL, 100ULL, 256ULL}) {
    for (std::uint64_t M : {1ULL, 2ULL, 5ULL}) {
      const double theta = std::asin(std::sqrt(double(M) / double(N)));
      int best = 0;
      for (int k = 0; k <= std::ceil(kPi * std::sqrt(double(N) / double(M))); ++k)
        if (std::pow(std::sin((2 * k + 1) * theta), 2) > std::pow(std::sin((2 * best + 1) * theta), 2) + 1e-12)
          best = k;
      CHECK(optimal_iterations(N, M) == best);
    }
  }
}

TEST_CASE("Grover trajectory stays in the good/bad plane; diffusion inverts about the mean") {
  GroverProblem p{6, {3, 17, 40}};
  for (int k = 0; k < 8; ++k) {
    const auto s = grover_state(p, k);
    // Within the plane all marked amplitudes are equal and all unmarked equal.
    const Complex good = s[3];
    const Complex bad = s[0];
    double off = 0.0;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
      const bool marked = i == 3 || i == 17 || i == 40;
      off += std::norm(s[i] - (marked ? good : bad));
    }
    CHECK(std::sqrt(off) <= 1e-10);
  }
  Rng rng(2);
  const CVector v = random_state(16, rng);
  auto s = on_register(v);
  apply_diffusion(s, s.reg("R"));
  const Complex mean = v.mean();
  for (Eigen::Index i = 0; i < 16; ++i) CHECK(std::abs(s[static_cast<std::uint64_t>(i)] - (2.0 * mean - v(i))) < 1e-14);
}

TEST_CASE("amplitude amplification") {
  CVector v(4);
  v << 0.5, 0.5, 0.5, 0.5;
  const auto prepared = on_register(v);
  auto res = amplitude_amplify(prepared, basis_projector([](std::uint64_t i) { return i == 2; }), 1);
  CHECK(std::abs(res.probability - 1.0) <= 1e-12);

  auto all = amplitude_amplify(prepared, basis_projector([](std::uint64_t) { return true; }));
  CHECK(all.rounds == 0);
  CHECK(all.probability == doctest::Approx(1.0));

  Rng rng(12);
  const CVector w = random_state(64, rng);
  const auto prep = on_register(w);
  // Good subspace of dimension 4 spanned by random orthonormal vectors.
  const ComplexMatrix q = random_unitary(64, rng).leftCols(4);
  const ComplexMatrix proj = q * q.adjoint();
  const double p0 = (proj * w).squaredNorm();
  const double theta = std::asin(std::sqrt(p0));
  for (int r = 0; r < 6; ++r) {
    const auto a = amplitude_amplify(prep, matrix_projector(proj), r);
    CHECK(std::abs(a.probability - std::pow(std::sin((2 * r + 1) * theta), 2)) <= 1e-9);
  }
  const auto opt = amplitude_amplify(prep, matrix_projector(proj));
  CHECK(opt.probability >= std::max(p0, std::pow(std::sin((2 * opt.rounds + 1) * theta), 2)) - 1e-9);
  CHECK_THROWS_AS(amplitude_amplify(prep, basis_projector([](std::uint64_t) { return false; })), AlgorithmError);
}
