#pragma once

#include <cstdint>
#include <vector>

#include "qlsim/statesim.hpp"

namespace qlsim {

// Binary tree over the squared, normalised entries of a real vector. Nodes
// are stored heap-style: node 0 is the root, node i has children 2i+1, 2i+2,
// and the 2^depth leaves occupy the last positions.
class QramTree {
 public:
  int depth() const { return depth_; }
  std::uint64_t leaves() const { return std::uint64_t{1} << depth_; }
  double norm() const { return norm_; }
  const std::vector<double>& nodes() const { return nodes_; }

  // Node at `level` (0 = root, depth = leaves) and position within the level.
  double value(int level, std::uint64_t position) const;
  double leaf(std::uint64_t i) const { return value(depth_, i); }
  int sign(std::uint64_t i) const { return signs_[i]; }

  // Amplitude rebuilt from the root-to-leaf product of sqrt(child/parent)
  // ratios times the leaf sign; 0 when the path passes through an empty node.
  double path_amplitude(std::uint64_t i) const;

  friend QramTree build_tree(const std::vector<double>& x);

 private:
  int depth_ = 1;
  double norm_ = 0.0;
  std::vector<double> nodes_;
  std::vector<int> signs_;
};

// Pads to a power of two (at least 2 entries) with zeros.
QramTree build_tree(const std::vector<double>& x);

struct RotationNoise {
  double eps_rot = 0.0;
  std::uint64_t seed = 1;
};

struct QramResources {
  std::uint64_t rotations_applied = 0;  // rotations actually executed
  std::uint64_t rotations_formula = 0;  // sum_{k=1}^{depth-1} 2^k
  std::uint64_t sign_ops = 0;           // non-trivial sign corrections
  int depth = 0;                        // rotation layers, sign layer merged into the last
};

// Runs the level-by-level loading circuit (or its inverse) on `reg`. With
// noise, every executed rotation angle is shifted by an independent draw from
// U[-eps_rot, eps_rot]; the same draws are used in the inverse direction.
QramResources apply_loader(const QramTree& tree, StateVector& s, const Register& reg, bool inverse = false,
                           const RotationNoise* noise = nullptr);

// Requires `reg` to be |0...0> in every branch and width == depth.
StateVector load(const QramTree& tree, const StateVector& s, const Register& reg,
                 QramResources* resources = nullptr);

struct NoisyLoad {
  StateVector state;
  std::uint64_t rotations = 0;  // k, the number of perturbed rotations
};
NoisyLoad load_noisy(const QramTree& tree, const StateVector& s, const Register& reg, const RotationNoise& noise);

// Fresh single-register state |x / |x|> built by the loader.
StateVector qram_state(const std::vector<double>& x, const std::string& register_name = "I");

// The 2x2 sign correction applied after the last rotation for leaf signs
// (left, right).
ComplexMatrix process_sign(int left, int right);

}  // namespace qlsim
