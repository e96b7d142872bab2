#include "qlsim/qram.hpp"

#include <cmath>

namespace qlsim {

double QramTree::value(int level, std::uint64_t position) const {
  if (level < 0 || level > depth_ || position >= (std::uint64_t{1} << level)) throw InputError("tree node out of range");
  return nodes_[((std::uint64_t{1} << level) - 1) + position];
}

double QramTree::path_amplitude(std::uint64_t i) const {
  double amp = 1.0;
  for (int level = 1; level <= depth_; ++level) {
    const double parent = value(level - 1, i >> (depth_ - level + 1));
    const double child = value(level, i >> (depth_ - level));
    if (parent == 0.0) return 0.0;
    amp *= std::sqrt(child / parent);
  }
  return amp * signs_[i];
}

QramTree build_tree(const std::vector<double>& x) {
  double norm2 = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("vector entries must be finite");
    norm2 += v * v;
  }
  if (x.empty() || norm2 == 0.0) throw InputError("cannot store the zero vector");
  QramTree t;
  t.depth_ = std::max(1, ceil_log2(x.size()));
  t.norm_ = std::sqrt(norm2);
  const std::uint64_t n = t.leaves();
  t.nodes_.assign(2 * n - 1, 0.0);
  t.signs_.assign(n, 1);
  for (std::uint64_t i = 0; i < x.size(); ++i) {
    const double a = x[i] / t.norm_;
    t.nodes_[n - 1 + i] = a * a;
    t.signs_[i] = x[i] < 0.0 ? -1 : 1;
  }
  for (std::uint64_t i = n - 1; i-- > 0;) t.nodes_[i] = t.nodes_[2 * i + 1] + t.nodes_[2 * i + 2];
  return t;
}

ComplexMatrix process_sign(int left, int right) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  if (left > 0 && right < 0) m(1, 1) = -1.0;
  if (left < 0 && right > 0) m(0, 0) = -1.0;
  if (left < 0 && right < 0) m = -m;
  return m;
}

namespace {
ComplexMatrix rotation(double theta) {
  ComplexMatrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}
}  // namespace

QramResources apply_loader(const QramTree& tree, StateVector& s, const Register& reg, bool inverse,
                           const RotationNoise* noise) {
  const int d = tree.depth();
  if (reg.width != d) throw InputError("register width must equal the tree depth");
  if (noise && noise->eps_rot < 0.0) throw InputError("rotation noise bound must be non-negative");

  QramResources res;
  res.depth = d;
  res.rotations_formula = (std::uint64_t{1} << d) - 2;

  Rng rng(noise ? noise->seed : 0);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  // One multiplexed gate list per level, built in forward order so the noise
  // draws do not depend on direction.
  std::vector<std::vector<ComplexMatrix>> layers(static_cast<std::size_t>(d));
  for (int level = 0; level < d; ++level) {
    const std::uint64_t count = std::uint64_t{1} << level;
    auto& gates = layers[static_cast<std::size_t>(level)];
    gates.assign(count, ComplexMatrix::Identity(2, 2));
    for (std::uint64_t p = 0; p < count; ++p) {
      const double parent = tree.value(level, p);
      if (parent == 0.0) continue;
      const double left = tree.value(level + 1, 2 * p);
      double theta = std::acos(std::sqrt(std::min(1.0, left / parent)));
      if (noise && noise->eps_rot > 0.0) theta += noise->eps_rot * jitter(rng);
      ++res.rotations_applied;
      ComplexMatrix g = rotation(theta);
      if (level == d - 1) {
        const int sl = tree.sign(2 * p), sr = tree.sign(2 * p + 1);
        if (sl < 0 || sr < 0) ++res.sign_ops;
        g = process_sign(sl, sr) * g;
      }
      gates[p] = inverse ? ComplexMatrix(g.adjoint()) : g;
    }
  }

  auto run = [&](int level) {
    const Register control = reg.slice(0, level);
    const Register target = reg.qubit(level);
    apply_multiplexed(s, control, target, layers[static_cast<std::size_t>(level)]);
  };
  if (inverse) {
    for (int level = d - 1; level >= 0; --level) run(level);
  } else {
    for (int level = 0; level < d; ++level) run(level);
  }
  return res;
}

namespace {
void require_zero_register(const StateVector& s, const Register& reg) {
  const std::uint64_t m = s.mask(reg);
  for (std::uint64_t i = 0; i < s.size(); ++i) {
    if ((i & m) != 0 && std::abs(s[i]) > 1e-12) throw InputError("qRAM target register is not in |0...0>");
  }
}
}  // namespace

StateVector load(const QramTree& tree, const StateVector& s, const Register& reg, QramResources* resources) {
  require_zero_register(s, reg);
  StateVector out = s;
  const auto res = apply_loader(tree, out, reg);
  if (resources) *resources = res;
  return out;
}

NoisyLoad load_noisy(const QramTree& tree, const StateVector& s, const Register& reg, const RotationNoise& noise) {
  require_zero_register(s, reg);
  NoisyLoad out{s, 0};
  const auto res = apply_loader(tree, out.state, reg, false, &noise);
  out.rotations = res.rotations_applied;
  return out;
}

StateVector qram_state(const std::vector<double>& x, const std::string& register_name) {
  const QramTree tree = build_tree(x);
  RegisterLayout l;
  l.add(register_name, tree.depth());
  return load(tree, init_basis(l, 0), l[register_name]);
}

}  // namespace qlsim
