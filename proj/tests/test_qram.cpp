#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qlsim/qram.hpp"

using namespace qlsim;

namespace {
std::vector<double> random_signed(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

double l2_distance(const StateVector& a, const StateVector& b) {
  double s = 0.0;
  for (std::uint64_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

StateVector fresh(int width) {
  RegisterLayout l;
  l.add("I", width);
  return init_basis(l, 0);
}
}  // namespace

TEST_CASE("build_tree examples") {
  auto t = build_tree({1, 0});
  CHECK(t.depth() == 1);
  CHECK(t.leaf(0) == 1.0);
  CHECK(t.leaf(1) == 0.0);
  CHECK(t.sign(0) == 1);
  CHECK(t.sign(1) == 1);
  CHECK(t.value(0, 0) == 1.0);

  t = build_tree({0.6, 0.8});
  CHECK(t.leaf(0) == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(t.leaf(1) == doctest::Approx(0.64).epsilon(1e-14));

  t = build_tree({0.5, -0.5, 0.5, -0.5});
  for (std::uint64_t i = 0; i < 4; ++i) CHECK(t.leaf(i) == doctest::Approx(0.25));
  CHECK(t.sign(0) == 1);
  CHECK(t.sign(1) == -1);
  CHECK(t.sign(2) == 1);
  CHECK(t.sign(3) == -1);
  CHECK(t.value(1, 0) == doctest::Approx(0.5));
  CHECK(t.value(1, 1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_tree({0, 0, 0}), InputError);
  CHECK_THROWS_AS(build_tree({}), InputError);

  t = build_tree({3, 4, 0});
  CHECK(t.depth() == 2);
  CHECK(t.norm() == doctest::Approx(5.0));
  CHECK(t.leaf(3) == 0.0);
}

TEST_CASE("tree invariants on random vectors") {
  Rng rng(6);
  for (std::size_t n : {2u, 5u, 16u, 100u}) {
    const auto x = random_signed(n, rng);
    const auto t = build_tree(x);
    for (int level = 0; level < t.depth(); ++level)
      for (std::uint64_t p = 0; p < (std::uint64_t{1} << level); ++p)
        CHECK(std::abs(t.value(level, p) - t.value(level + 1, 2 * p) - t.value(level + 1, 2 * p + 1)) <= 1e-12);
    CHECK(std::abs(t.value(0, 0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("telescoping path product matches each leaf amplitude") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_signed(32, rng);
    if (trial % 2) std::fill(x.begin() + 8, x.begin() + 16, 0.0);
    const auto t = build_tree(x);
    double n = 0.0;
    for (double v : x) n += v * v;
    n = std::sqrt(n);
    for (std::uint64_t i = 0; i < x.size(); ++i) CHECK(std::abs(t.path_amplitude(i) - x[i] / n) <= 1e-12);
  }
}

TEST_CASE("load examples") {
  auto s = load(build_tree({1, 0, 0, 0}), fresh(2), fresh(2).reg("I"));
  CHECK(std::abs(s[0] - 1.0) < 1e-15);

  const double r = 1.0 / std::sqrt(2.0);
  s = load(build_tree({r, r}), fresh(1), fresh(1).reg("I"));
  CHECK(std::abs(s[0] - r) < 1e-15);
  CHECK(std::abs(s[1] - r) < 1e-15);

  Rng rng(128);
  const auto x = random_signed(128, rng);
  QramResources res;
  const auto tree = build_tree(x);
  CHECK(tree.depth() == 7);
  s = load(tree, fresh(7), fresh(7).reg("I"), &res);
  const auto oracle = amplitude_encode(x);
  CHECK(l2_distance(s, oracle) <= 1e-12);
  CHECK(res.depth == 7);
  CHECK(res.rotations_formula == 126);
  CHECK(res.rotations_applied == 127);

  auto dirty = fresh(2);
  dirty[1] = 1.0;
  dirty[0] = 0.0;
  CHECK_THROWS_AS(load(build_tree({1, 2, 3, 4}), dirty, dirty.reg("I")), InputError);
  CHECK_THROWS_AS(load(build_tree({1, 2, 3, 4}), fresh(3), fresh(3).reg("I")), InputError);
}

TEST_CASE("processSign cases on two-leaf subtrees") {
  for (double a : {0.6, -0.6, 0.0})
    for (double b : {0.8, -0.8, 0.0}) {
      if (a == 0.0 && b == 0.0) continue;
      const auto s = qram_state({a, b});
      const double n = std::hypot(a, b);
      CHECK(std::abs(s[0] - a / n) < 1e-15);
      CHECK(std::abs(s[1] - b / n) < 1e-15);
    }
  const ComplexMatrix z = process_sign(1, -1);
  CHECK(z(0, 0) == Complex(1.0));
  CHECK(z(1, 1) == Complex(-1.0));
  CHECK(process_sign(-1, 1) == -z);
  CHECK(process_sign(-1, -1) == -ComplexMatrix::Identity(2, 2));
  CHECK(process_sign(1, 1) == ComplexMatrix::Identity(2, 2));
}

TEST_CASE("zero subtrees are skipped") {
  QramResources res;
  const auto tree = build_tree({0, 0, 0, 0, 1, 2, 0, 0});
  const auto s = load(tree, fresh(3), fresh(3).reg("I"), &res);
  // Root, right child, and its left grandchild carry mass.
  CHECK(res.rotations_applied == 3);
  CHECK(std::abs(s[4] - 1.0 / std::sqrt(5.0)) < 1e-15);
  CHECK(std::abs(s[5] - 2.0 / std::sqrt(5.0)) < 1e-15);
}

TEST_CASE("loader inside a larger register file and its inverse") {
  Rng rng(3);
  RegisterLayout l;
  l.add("a", 1).add("I", 3).add("b", 1);
  auto s = init_basis(l, 0);
  s[0] = 0.6;
  s[1] = 0.8;  // b in superposition, I clear
  const auto x = random_signed(8, rng);
  const auto tree = build_tree(x);
  const auto loaded = load(tree, s, s.reg("I"));
  const CVector ref = to_cvector(amplitude_encode(x));
  CHECK((slice_register(loaded, loaded.reg("I"), 0) - 0.6 * ref).norm() < 1e-12);
  CHECK((slice_register(loaded, loaded.reg("I"), 1) - 0.8 * ref).norm() < 1e-12);
  auto back = loaded;
  apply_loader(tree, back, back.reg("I"), true);
  CHECK(l2_distance(back, s) < 1e-12);

  const RotationNoise noise{0.05, 11};
  auto noisy = s;
  apply_loader(tree, noisy, noisy.reg("I"), false, &noise);
  apply_loader(tree, noisy, noisy.reg("I"), true, &noise);
  CHECK(l2_distance(noisy, s) < 1e-12);
}

TEST_CASE("noisy loading obeys the additive bound") {
  Rng rng(500);
  const double eps = 0.01;
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::size_t{1} << (1 + trial % 6);
    const auto x = random_signed(n, rng);
    const auto tree = build_tree(x);
    const auto ideal = load(tree, fresh(tree.depth()), fresh(tree.depth()).reg("I"));
    const auto noisy = load_noisy(tree, fresh(tree.depth()), fresh(tree.depth()).reg("I"),
                                  RotationNoise{eps, static_cast<std::uint64_t>(trial)});
    CHECK(std::abs(noisy.state.norm() - 1.0) <= 1e-10);
    if (l2_distance(noisy.state, ideal) > static_cast<double>(noisy.rotations) * eps) ++violations;
  }
  CHECK(violations == 0);

  const auto tree = build_tree(random_signed(16, rng));
  const auto ideal = load(tree, fresh(4), fresh(4).reg("I"));
  const auto same = load_noisy(tree, fresh(4), fresh(4).reg("I"), RotationNoise{0.0, 3});
  CHECK(l2_distance(same.state, ideal) == 0.0);
}

TEST_CASE("median noisy deviation grows at most linearly in N") {
  Rng rng(2);
  const double eps = 0.01;
  std::vector<double> medians;
  for (int d = 2; d <= 6; ++d) {
    std::vector<double> dev;
    for (int trial = 0; trial < 100; ++trial) {
      const auto tree = build_tree(random_signed(std::size_t{1} << d, rng));
      const auto ideal = load(tree, fresh(d), fresh(d).reg("I"));
      const auto noisy =
          load_noisy(tree, fresh(d), fresh(d).reg("I"), RotationNoise{eps, static_cast<std::uint64_t>(1000 * d + trial)});
      dev.push_back(l2_distance(noisy.state, ideal));
    }
    std::nth_element(dev.begin(), dev.begin() + 50, dev.end());
    medians.push_back(dev[50]);
  }
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] <= 2.0 * medians[i - 1] * 1.25);
}
