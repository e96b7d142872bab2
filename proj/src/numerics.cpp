#include "qlsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlsim {

bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

int ceil_log2(std::uint64_t v) {
  int n = 0;
  while ((std::uint64_t{1} << n) < v) ++n;
  return n;
}

double max_asymmetry(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(ComplexMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw InputError("Hermitian operator must be square, got " + std::to_string(m_.rows()) + "x" +
                     std::to_string(m_.cols()));
  }
  if (!is_power_of_two(static_cast<std::uint64_t>(m_.rows()))) {
    throw InputError("Hermitian operator dimension " + std::to_string(m_.rows()) +
                     " is not a power of two");
  }
  if (!m_.allFinite()) throw InputError("Hermitian operator has non-finite entries");
  const double asym = max_asymmetry(m_);
  if (asym > tol * std::max(1.0, m_.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |A - A^dagger| entry = " << asym;
    throw InputError(os.str());
  }
}

int HermitianOperator::qubits() const { return ceil_log2(static_cast<std::uint64_t>(m_.rows())); }

namespace {

// Fix the free phase of each column so that its first significant entry is
// real and positive. Makes eigenvector output reproducible.
void normalise_column_phases(ComplexMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double mag = std::abs(v(r, c));
      if (mag > 1e-12) {
        v.col(c) *= std::conj(v(r, c)) / mag;
        break;
      }
    }
  }
}

}  // namespace

SpectralDecomposition eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw AlgorithmError("Hermitian eigensolver did not converge");
  const Eigen::Index n = h.dim();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  normalise_column_phases(out.vectors);
  return out;
}

SingularValueDecomposition svd(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SingularValueDecomposition out;
  out.u = solver.matrixU();
  out.v = solver.matrixV();
  out.sigma = solver.singularValues();
  const double cutoff = out.sigma.size() > 0 ? 1e-12 * out.sigma(0) : 0.0;
  out.rank = 0;
  for (Eigen::Index i = 0; i < out.sigma.size(); ++i) {
    if (out.sigma(i) > cutoff && out.sigma(i) > 0.0) ++out.rank;
  }
  return out;
}

double condition_number(const HermitianOperator& h) {
  const RVector ev = eig_hermitian(h).eigenvalues.cwiseAbs();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  if (hi == 0.0 || lo <= 1e-14 * hi) throw AlgorithmError("singular matrix: condition number undefined");
  return hi / lo;
}

HermitianOperator hermitian_dilation(const ComplexMatrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << std::max(1, ceil_log2(m + n)));
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  h.block(0, m, m, n) = a;
  h.block(m, 0, n, m) = a.adjoint();
  return HermitianOperator(std::move(h));
}

ComplexMatrix pseudoinverse(const ComplexMatrix& a) {
  const SingularValueDecomposition d = svd(a);
  ComplexMatrix sigma_plus = ComplexMatrix::Zero(a.cols(), a.rows());
  for (int i = 0; i < d.rank; ++i) sigma_plus(i, i) = 1.0 / d.sigma(i);
  return d.v * sigma_plus * d.u.adjoint();
}

ComplexMatrix matrix_exponential_exact(const HermitianOperator& h, double t) {
  if (t == 0.0) return ComplexMatrix::Identity(h.dim(), h.dim());
  const SpectralDecomposition d = eig_hermitian(h);
  CVector phases(h.dim());
  for (Eigen::Index i = 0; i < h.dim(); ++i) phases(i) = std::exp(-kI * d.eigenvalues(i) * t);
  return d.vectors * phases.asDiagonal() * d.vectors.adjoint();
}

CVector classical_solve(const ComplexMatrix& a, const CVector& b) {
  if (a.rows() != b.size()) {
    throw InputError("dimension mismatch: A has " + std::to_string(a.rows()) + " rows, b has " +
                     std::to_string(b.size()) + " entries");
  }
  return pseudoinverse(a) * b;
}

double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> solver(a);
  return solver.singularValues()(0);
}

double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

double max_norm(const ComplexMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

bool is_unitary(const ComplexMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const ComplexMatrix e = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
  return max_norm(e) <= tol;
}

ComplexMatrix matrix_power(const ComplexMatrix& u, std::uint64_t e) {
  ComplexMatrix result = ComplexMatrix::Identity(u.rows(), u.cols());
  ComplexMatrix base = u;
  while (e > 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e > 0) base = base * base;
  }
  return result;
}

ComplexMatrix unitary_with_first_column(const CVector& v) {
  const Eigen::Index n = v.size();
  if (std::abs(v.norm() - 1.0) > 1e-10) throw InputError("unitary_with_first_column needs a unit vector");
  const double phi = std::abs(v(0)) > 0.0 ? std::arg(v(0)) : 0.0;
  const Complex phase = std::exp(kI * phi);
  const CVector w = v * std::conj(phase);
  CVector u = -w;
  u(0) += 1.0;
  ComplexMatrix h = ComplexMatrix::Identity(n, n);
  const double uu = u.squaredNorm();
  if (uu > 1e-30) h -= (2.0 / uu) * u * u.adjoint();
  h.col(0) *= phase;
  return h;
}

ComplexMatrix random_complex_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double re = g(rng);
      const double im = g(rng);
      m(r, c) = Complex(re, im);
    }
  return m;
}

ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix z = random_complex_matrix(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) q.col(i) *= r(i, i) / mag;
  }
  return q;
}

HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix z = random_complex_matrix(dim, dim, rng);
  return HermitianOperator(0.5 * (z + z.adjoint()));
}

CVector random_state(Eigen::Index dim, Rng& rng) {
  CVector v = random_complex_matrix(dim, 1, rng).col(0);
  return v / v.norm();
}

RVector random_real_vector(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = g(rng);
  return v;
}

}  // namespace qlsim
