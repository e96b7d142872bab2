#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qlsim/numerics.hpp"

namespace qlsim {

// m = ceil(max_norm^2 t^2 / eps), at least 1.
int trotter_step_count(double max_norm, double t, double eps);

struct TrotterPlan {
  std::vector<HermitianOperator> terms;
  double t = 0.0;
  int m = 1;

  void validate() const;
  ComplexMatrix total() const;
};

// (prod_i e^{-i H_i t/m})^m, factors multiplied in term order.
ComplexMatrix trotter_evolve(const TrotterPlan& plan);
// Spectral distance to exp(-i (sum H_i) t).
double trotter_error(const TrotterPlan& plan);

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;  // sorted ascending

  static Graph from_pattern(const ComplexMatrix& h, double tol = 0.0);
  void add_edge(int a, int b);
  int max_degree() const;
  std::vector<std::pair<int, int>> edges() const;  // a < b
};

struct EdgeColouring {
  Graph graph;
  // Keyed by (a, b) with a < b.
  std::map<std::pair<int, int>, std::pair<int, int>> colour;

  int colour_count() const;
  bool is_proper() const;
  // Edges of each colour, colours in sorted order.
  std::vector<std::vector<std::pair<int, int>>> classes() const;
};

// colour(ab) = (index(a, b), index(b, a)), a on side 0, indices 1-based
// positions in the sorted adjacency lists.
EdgeColouring bipartite_edge_colouring(const Graph& g, const std::vector<int>& side);

bool is_one_sparse(const ComplexMatrix& h, double tol = 0.0);

// Diagonal part (when nonzero) followed by 1-sparse off-diagonal terms. The
// off-diagonal graph is split by the highest bit in which the endpoints'
// indices differ; each piece is bipartite along that bit and is coloured with
// bipartite_edge_colouring, one term per colour.
std::vector<HermitianOperator> one_sparse_decompose(const HermitianOperator& h);

// exp(-i h t) for 1-sparse h from closed-form 2x2 blocks.
ComplexMatrix simulate_one_sparse(const HermitianOperator& h, double t);

// Matrix-level check of the edge-oracle construction on |a, b, z>:
// H~ = sum_c [V_c S V_c + W_c T W_c] for an off-diagonal H whose real and
// imaginary parts are integers representable in z_bits two's complement.
// Returns the (N * N * 2^z_bits)-dimensional matrix.
ComplexMatrix oracle_sum_matrix(const HermitianOperator& h, int z_bits);

struct FaultySimConfig {
  double error_norm = 0.0;  // R
  int trials = 100;
  std::uint64_t seed = 1;
  double epsilon = 0.1;     // exceedance threshold
  int threads = 1;
};

struct FaultySimReport {
  std::vector<double> deviation_from_noiseless;  // per trial, trial order
  std::vector<double> deviation_from_exact;
  double trotter_error = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  double exceed_fraction = 0.0;
  double bernstein_bound = 0.0;  // 2N exp(-eps^2 / (2 (v + max(R, L) eps / 3))), capped at 1
  double variance_statistic = 0.0;
  double per_term_bound = 0.0;
};

// Each Trotter factor e^{-i (H_i + E) t/m} gets a fresh error E with
// ||E|| = R. Trials 2j and 2j+1 share draws with opposite signs, so the
// ensemble is exactly zero-mean. Trial seeds are seed + trial_index (odd
// trials reuse the seed of their even partner).
FaultySimReport faulty_sim_experiment(const TrotterPlan& plan, const FaultySimConfig& cfg);

// Random Hermitian with spectral norm exactly r (Gaussian ensemble, rescaled).
ComplexMatrix random_bounded_hermitian(Eigen::Index dim, double r, Rng& rng);

}  // namespace qlsim
