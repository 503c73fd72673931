#pragma once

// Dense state and operator types for one- and two-qubit polarization states.
//
// Basis ordering is global: (V, H) for one qubit and (VV, VH, HV, HH) for
// two qubits, i.e. the signal arm is the most significant tensor factor.

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace fuzzytomo {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Operator = Eigen::MatrixXcd;

/// Structural tolerance for normalization, hermiticity and unitarity checks.
inline constexpr double kStructuralTol = 1e-12;

/// Normalized pure state. Construction validates the unit norm.
class StateVector {
public:
  explicit StateVector(CVector amplitudes);

  /// Normalizes an arbitrary nonzero vector.
  static StateVector normalized(const CVector& raw);
  static StateVector basis(int dim, int index);

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }

private:
  CVector amps_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
  explicit DensityMatrix(CMatrix elements);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& elements() const { return rho_; }

private:
  CMatrix rho_;
};

CMatrix tensor(const CMatrix& a, const CMatrix& b);
StateVector tensor(const StateVector& a, const StateVector& b);

/// |<phi|psi>|^2. Throws std::invalid_argument on dimension mismatch.
double fidelity_pure(const StateVector& phi, const StateVector& psi);

DensityMatrix density_from_state(const StateVector& psi);

/// Haar-distributed pure state: normalized vector of i.i.d. complex Gaussians.
template <typename Rng>
StateVector haar_random_state(int dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector raw(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    raw(i) = Complex(re, im);
  }
  return StateVector::normalized(raw);
}

bool is_unitary(const CMatrix& u, double tol = kStructuralTol);
bool is_hermitian(const CMatrix& m, double tol = kStructuralTol);

/// Pauli matrices in the (V, H) basis; sigma_z = diag(1, -1) so that |V> is +z.
Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

/// Projector (I + n.sigma)/2 onto the Bloch direction n.
CMatrix bloch_projector(const Eigen::Vector3d& n);

}  // namespace fuzzytomo
