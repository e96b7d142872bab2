#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qlsim/error.hpp"

namespace qlsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Hermitian matrix of power-of-two dimension. Construction validates both.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m, double tol = 1e-12);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  int qubits() const;

 private:
  ComplexMatrix m_;
};

struct SpectralDecomposition {
  RVector eigenvalues;     // descending
  ComplexMatrix vectors;   // orthonormal columns
};

struct SingularValueDecomposition {
  ComplexMatrix u;
  RVector sigma;  // descending, full min(m, n) length
  ComplexMatrix v;
  int rank = 0;
};

SpectralDecomposition eig_hermitian(const HermitianOperator& h);
SingularValueDecomposition svd(const ComplexMatrix& a);
double condition_number(const HermitianOperator& h);
HermitianOperator hermitian_dilation(const ComplexMatrix& a);
ComplexMatrix pseudoinverse(const ComplexMatrix& a);
// e^{-iHt}
ComplexMatrix matrix_exponential_exact(const HermitianOperator& h, double t);
CVector classical_solve(const ComplexMatrix& a, const CVector& b);

double spectral_norm(const ComplexMatrix& a);
double frobenius_norm(const ComplexMatrix& a);
double max_norm(const ComplexMatrix& a);
double max_asymmetry(const ComplexMatrix& a);

bool is_unitary(const ComplexMatrix& u, double tol = 1e-10);
bool is_power_of_two(std::uint64_t v);
int ceil_log2(std::uint64_t v);

// U^e by repeated squaring.
ComplexMatrix matrix_power(const ComplexMatrix& u, std::uint64_t e);

// Unitary whose first column is the unit vector v (Householder reflection,
// up to a phase on that column which is absorbed so that U e_0 = v exactly).
ComplexMatrix unitary_with_first_column(const CVector& v);

// Random test data.
ComplexMatrix random_complex_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng);
HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng);
CVector random_state(Eigen::Index dim, Rng& rng);
RVector random_real_vector(Eigen::Index dim, Rng& rng);

}  // namespace qlsim
