#include "qlsim/hamsim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace qlsim {

int trotter_step_count(double max_norm, double t, double eps) {
  if (eps <= 0.0) throw InputError("Trotter precision must be positive");
  const double m = std::ceil(max_norm * max_norm * t * t / eps);
  if (m > 1e9) throw ResourceError("Trotter step count exceeds 1e9");
  return std::max(1, static_cast<int>(m));
}

void TrotterPlan::validate() const {
  if (terms.empty()) throw InputError("Trotter plan has no terms");
  if (m < 1) throw InputError("Trotter plan needs m >= 1");
  for (const auto& h : terms)
    if (h.dim() != terms.front().dim()) throw InputError("Trotter terms differ in dimension");
}

ComplexMatrix TrotterPlan::total() const {
  ComplexMatrix sum = ComplexMatrix::Zero(terms.front().dim(), terms.front().dim());
  for (const auto& h : terms) sum += h.matrix();
  return sum;
}

ComplexMatrix trotter_evolve(const TrotterPlan& plan) {
  plan.validate();
  const double dt = plan.t / plan.m;
  ComplexMatrix step = ComplexMatrix::Identity(plan.terms.front().dim(), plan.terms.front().dim());
  for (const auto& h : plan.terms) step = step * matrix_exponential_exact(h, dt);
  return matrix_power(step, static_cast<std::uint64_t>(plan.m));
}

double trotter_error(const TrotterPlan& plan) {
  const ComplexMatrix exact = matrix_exponential_exact(HermitianOperator(plan.total(), 1e-10), plan.t);
  return spectral_norm(trotter_evolve(plan) - exact);
}

Graph Graph::from_pattern(const ComplexMatrix& h, double tol) {
  Graph g;
  g.n = static_cast<int>(h.rows());
  g.adj.resize(static_cast<std::size_t>(g.n));
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b)
      if (std::abs(h(a, b)) > tol) g.add_edge(a, b);
  return g;
}

void Graph::add_edge(int a, int b) {
  if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw InputError("invalid edge");
  auto ins = [](std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  ins(adj[static_cast<std::size_t>(a)], b);
  ins(adj[static_cast<std::size_t>(b)], a);
}

int Graph::max_degree() const {
  std::size_t d = 0;
  for (const auto& l : adj) d = std::max(d, l.size());
  return static_cast<int>(d);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n; ++a)
    for (int b : adj[static_cast<std::size_t>(a)])
      if (a < b) out.emplace_back(a, b);
  return out;
}

int EdgeColouring::colour_count() const {
  std::set<std::pair<int, int>> used;
  for (const auto& [e, c] : colour) used.insert(c);
  return static_cast<int>(used.size());
}

bool EdgeColouring::is_proper() const {
  for (int v = 0; v < graph.n; ++v) {
    std::set<std::pair<int, int>> seen;
    for (int u : graph.adj[static_cast<std::size_t>(v)]) {
      const auto key = std::minmax(u, v);
      auto it = colour.find({key.first, key.second});
      if (it == colour.end() || !seen.insert(it->second).second) return false;
    }
  }
  return true;
}

std::vector<std::vector<std::pair<int, int>>> EdgeColouring::classes() const {
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> by;
  for (const auto& [e, c] : colour) by[c].push_back(e);
  std::vector<std::vector<std::pair<int, int>>> out;
  for (auto& [c, es] : by) out.push_back(std::move(es));
  return out;
}

namespace {
int position_in(const std::vector<int>& list, int x) {
  const auto it = std::lower_bound(list.begin(), list.end(), x);
  return static_cast<int>(it - list.begin()) + 1;
}
}  // namespace

EdgeColouring bipartite_edge_colouring(const Graph& g, const std::vector<int>& side) {
  if (side.size() != static_cast<std::size_t>(g.n)) throw InputError("bipartition size differs from vertex count");
  EdgeColouring out;
  out.graph = g;
  for (const auto& [a, b] : g.edges()) {
    if (side[static_cast<std::size_t>(a)] == side[static_cast<std::size_t>(b)]) {
      throw InputError("graph is not bipartite for the given parts: edge " + std::to_string(a) + "-" +
                       std::to_string(b) + " lies inside one part");
    }
    const int left = side[static_cast<std::size_t>(a)] == 0 ? a : b;
    const int right = left == a ? b : a;
    out.colour[{a, b}] = {position_in(g.adj[static_cast<std::size_t>(left)], right),
                          position_in(g.adj[static_cast<std::size_t>(right)], left)};
  }
  return out;
}

bool is_one_sparse(const ComplexMatrix& h, double tol) {
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    int count = 0;
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      if (c != r && std::abs(h(r, c)) > tol) ++count;
    if (count > 1) return false;
  }
  return true;
}

namespace {

int highest_differing_bit(int a, int b) {
  int x = a ^ b;
  int bit = -1;
  while (x) {
    ++bit;
    x >>= 1;
  }
  return bit;
}

// Matchings covering every off-diagonal edge of h, each a colour class of a
// bipartite piece.
std::vector<std::vector<std::pair<int, int>>> off_diagonal_matchings(const ComplexMatrix& h) {
  const int n = static_cast<int>(h.rows());
  const Graph full = Graph::from_pattern(h);
  std::map<int, Graph> pieces;
  for (const auto& [a, b] : full.edges()) {
    const int bit = highest_differing_bit(a, b);
    auto& g = pieces[bit];
    if (g.n == 0) {
      g.n = n;
      g.adj.resize(static_cast<std::size_t>(n));
    }
    g.add_edge(a, b);
  }
  std::vector<std::vector<std::pair<int, int>>> out;
  for (const auto& [bit, g] : pieces) {
    std::vector<int> side(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) side[static_cast<std::size_t>(v)] = (v >> bit) & 1;
    for (auto& cls : bipartite_edge_colouring(g, side).classes()) out.push_back(std::move(cls));
  }
  return out;
}

}  // namespace

std::vector<HermitianOperator> one_sparse_decompose(const HermitianOperator& h) {
  const ComplexMatrix& m = h.matrix();
  const Eigen::Index n = h.dim();
  std::vector<HermitianOperator> terms;
  ComplexMatrix diag = ComplexMatrix::Zero(n, n);
  diag.diagonal() = m.diagonal().real().cast<Complex>();
  if (diag.cwiseAbs().maxCoeff() > 0.0) terms.emplace_back(diag);
  for (const auto& cls : off_diagonal_matchings(m)) {
    ComplexMatrix t = ComplexMatrix::Zero(n, n);
    for (const auto& [a, b] : cls) {
      t(a, b) = m(a, b);
      t(b, a) = m(b, a);
    }
    terms.emplace_back(t);
  }
  if (terms.empty()) terms.emplace_back(ComplexMatrix::Zero(n, n));
  return terms;
}

ComplexMatrix simulate_one_sparse(const HermitianOperator& h, double t) {
  const ComplexMatrix& m = h.matrix();
  if (!is_one_sparse(m)) throw InputError("simulate_one_sparse: input is not 1-sparse");
  const Eigen::Index n = h.dim();
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (Eigen::Index a = 0; a < n; ++a) {
    if (done[static_cast<std::size_t>(a)]) continue;
    Eigen::Index partner = -1;
    for (Eigen::Index b = 0; b < n; ++b)
      if (b != a && m(a, b) != Complex(0.0)) partner = b;
    if (partner < 0) {
      u(a, a) = std::exp(-kI * m(a, a).real() * t);
      done[static_cast<std::size_t>(a)] = true;
      continue;
    }
    // Block [[p, w], [conj w, q]] = c0 I + (x sx + y sy + z sz).
    const double p = m(a, a).real();
    const double q = m(partner, partner).real();
    const Complex w = m(a, partner);
    const double c0 = 0.5 * (p + q);
    const double z = 0.5 * (p - q);
    const double r = std::sqrt(z * z + std::norm(w));
    const Complex global = std::exp(-kI * c0 * t);
    const double c = std::cos(r * t);
    const double s = r > 0.0 ? std::sin(r * t) / r : t;
    u(a, a) = global * (c - kI * s * z);
    u(partner, partner) = global * (c + kI * s * z);
    u(a, partner) = global * (-kI * s * w);
    u(partner, a) = global * (-kI * s * std::conj(w));
    done[static_cast<std::size_t>(a)] = true;
    done[static_cast<std::size_t>(partner)] = true;
  }
  return u;
}

ComplexMatrix oracle_sum_matrix(const HermitianOperator& h, int z_bits) {
  const ComplexMatrix& m = h.matrix();
  const int N = static_cast<int>(h.dim());
  if (z_bits < 2 || z_bits > 6) throw InputError("z register width must be in [2, 6]");
  const int zdim = 1 << z_bits;
  const int limit = (1 << (z_bits - 1)) - 1;
  auto encode = [&](int v) { return v & (zdim - 1); };
  auto decode = [&](int z) { return z >= zdim / 2 ? z - zdim : z; };
  for (int a = 0; a < N; ++a) {
    if (m(a, a) != Complex(0.0)) throw InputError("oracle check expects a zero diagonal");
    for (int b = 0; b < N; ++b) {
      const double re = m(a, b).real();
      const double im = m(a, b).imag();
      if (re != std::round(re) || im != std::round(im) || std::abs(re) > limit || std::abs(im) > limit) {
        throw InputError("entries must be integers representable in the z register");
      }
    }
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(N) * N * zdim;
  auto idx = [&](int a, int b, int z) { return (static_cast<Eigen::Index>(a) * N + b) * zdim + z; };

  // S and T have one nonzero per column: column j maps to (row, value).
  std::vector<Eigen::Index> s_row(static_cast<std::size_t>(dim)), t_row(static_cast<std::size_t>(dim), -1);
  std::vector<Complex> s_val(static_cast<std::size_t>(dim)), t_val(static_cast<std::size_t>(dim));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int z = 0; z < zdim; ++z) {
        const int x = decode(z);
        const auto j = static_cast<std::size_t>(idx(a, b, z));
        s_row[j] = idx(b, a, z);
        s_val[j] = static_cast<double>(x);
        if (x != -zdim / 2) {
          t_row[j] = idx(b, a, encode(-x));
          t_val[j] = kI * static_cast<double>(x);
        }
      }

  // V and W are involutive permutations, so V S V e_j = s_val * e_{v(s_row(v(j)))}.
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  std::vector<Eigen::Index> pv(static_cast<std::size_t>(dim)), pw(static_cast<std::size_t>(dim));
  for (const auto& cls : off_diagonal_matchings(m)) {
    std::vector<int> partner(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a) partner[static_cast<std::size_t>(a)] = a;
    for (const auto& [a, b] : cls) {
      partner[static_cast<std::size_t>(a)] = b;
      partner[static_cast<std::size_t>(b)] = a;
    }
    for (int a = 0; a < N; ++a) {
      const int v = partner[static_cast<std::size_t>(a)];
      const Complex entry = v == a ? Complex(0.0) : m(v, a);
      const int xr = static_cast<int>(entry.real());
      const int yi = static_cast<int>(entry.imag());
      for (int b = 0; b < N; ++b)
        for (int z = 0; z < zdim; ++z) {
          const auto j = static_cast<std::size_t>(idx(a, b, z));
          pv[j] = idx(a, b ^ v, z ^ encode(xr));
          pw[j] = idx(a, b ^ v, z ^ encode(yi));
        }
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto jv = static_cast<std::size_t>(pv[static_cast<std::size_t>(j)]);
      total(pv[static_cast<std::size_t>(s_row[jv])], j) += s_val[jv];
      const auto jw = static_cast<std::size_t>(pw[static_cast<std::size_t>(j)]);
      if (t_row[jw] >= 0) total(pw[static_cast<std::size_t>(t_row[jw])], j) += t_val[jw];
    }
  }
  return total;
}

ComplexMatrix random_bounded_hermitian(Eigen::Index dim, double r, Rng& rng) {
  if (r == 0.0) return ComplexMatrix::Zero(dim, dim);
  const ComplexMatrix z = random_complex_matrix(dim, dim, rng);
  const ComplexMatrix g = 0.5 * (z + z.adjoint());
  return (r / spectral_norm(g)) * g;
}

namespace {
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}
}  // namespace

FaultySimReport faulty_sim_experiment(const TrotterPlan& plan, const FaultySimConfig& cfg) {
  plan.validate();
  if (cfg.error_norm < 0.0) throw InputError("error norm bound R must be non-negative");
  if (cfg.trials < 1) throw InputError("faulty simulation needs at least one trial");
  const Eigen::Index dim = plan.terms.front().dim();
  const double dt = plan.t / plan.m;
  std::vector<ComplexMatrix> factors;
  for (const auto& h : plan.terms) factors.push_back(matrix_exponential_exact(h, dt));
  ComplexMatrix noiseless = ComplexMatrix::Identity(dim, dim);
  for (int s = 0; s < plan.m; ++s)
    for (const auto& f : factors) noiseless = noiseless * f;
  const ComplexMatrix exact = matrix_exponential_exact(HermitianOperator(plan.total(), 1e-10), plan.t);

  FaultySimReport rep;
  rep.trotter_error = spectral_norm(noiseless - exact);
  rep.deviation_from_noiseless.assign(static_cast<std::size_t>(cfg.trials), 0.0);
  rep.deviation_from_exact.assign(static_cast<std::size_t>(cfg.trials), 0.0);

  auto run_trial = [&](int trial) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(trial - trial % 2));
    const double sign = trial % 2 ? -1.0 : 1.0;
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (int s = 0; s < plan.m; ++s) {
      for (std::size_t i = 0; i < plan.terms.size(); ++i) {
        if (cfg.error_norm == 0.0) {
          u = u * factors[i];
          continue;
        }
        const ComplexMatrix e = sign * random_bounded_hermitian(dim, cfg.error_norm, rng);
        u = u * matrix_exponential_exact(HermitianOperator(plan.terms[i].matrix() + e, 1e-10), dt);
      }
    }
    rep.deviation_from_noiseless[static_cast<std::size_t>(trial)] = spectral_norm(u - noiseless);
    rep.deviation_from_exact[static_cast<std::size_t>(trial)] = spectral_norm(u - exact);
  };

  const int threads = std::max(1, std::min(cfg.threads, cfg.trials));
  if (threads == 1) {
    for (int i = 0; i < cfg.trials; ++i) run_trial(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < cfg.trials; i += threads) run_trial(i);
      });
    for (auto& th : pool) th.join();
  }

  const auto& d = rep.deviation_from_noiseless;
  rep.median = quantile(d, 0.5);
  rep.p90 = quantile(d, 0.9);
  rep.max = *std::max_element(d.begin(), d.end());
  rep.exceed_fraction =
      static_cast<double>(std::count_if(d.begin(), d.end(), [&](double x) { return x > cfg.epsilon; })) /
      cfg.trials;
  // Sum of m * k independent terms X = E dt with ||X|| <= L; E X^2 <= L^2 I
  // bounds the variance statistic. The linear term uses R itself, which is
  // never smaller than L for t/m <= 1 and so only loosens the bound.
  rep.per_term_bound = cfg.error_norm * std::abs(dt);
  rep.variance_statistic = static_cast<double>(plan.m) * static_cast<double>(plan.terms.size()) *
                           rep.per_term_bound * rep.per_term_bound;
  const double eps = cfg.epsilon;
  const double linear = std::max(cfg.error_norm, rep.per_term_bound);
  const double denom = 2.0 * (rep.variance_statistic + linear * eps / 3.0);
  rep.bernstein_bound = denom > 0.0 ? std::min(1.0, 2.0 * dim * std::exp(-eps * eps / denom)) : 0.0;
  return rep;
}

}  // namespace qlsim
