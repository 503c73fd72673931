#include "fuzzytomo/quantum_core.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace fuzzytomo {

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 1) throw std::invalid_argument("StateVector: empty amplitude vector");
  const double norm2 = amps_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kStructuralTol)
    throw std::invalid_argument("StateVector: amplitudes not normalized (|c|^2 = " +
                                std::to_string(norm2) + ")");
}

StateVector StateVector::normalized(const CVector& raw) {
  const double n = raw.norm();
  if (!(n > 0.0)) throw std::invalid_argument("StateVector::normalized: zero vector");
  return StateVector(raw / n);
}

StateVector StateVector::basis(int dim, int index) {
  if (index < 0 || index >= dim) throw std::out_of_range("StateVector::basis: index out of range");
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

DensityMatrix::DensityMatrix(CMatrix elements) : rho_(std::move(elements)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 1)
    throw std::invalid_argument("DensityMatrix: not square");
  if (!is_hermitian(rho_)) throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > kStructuralTol)
    throw std::invalid_argument("DensityMatrix: trace differs from 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  CVector out = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  return StateVector::normalized(out);
}

double fidelity_pure(const StateVector& phi, const StateVector& psi) {
  if (phi.dim() != psi.dim()) throw std::invalid_argument("fidelity_pure: dimension mismatch");
  const double f = std::norm(phi.amplitudes().dot(psi.amplitudes()));
  return std::clamp(f, 0.0, 1.0);
}

DensityMatrix density_from_state(const StateVector& psi) {
  CMatrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
  // Exact hermiticity; outer product rounding can leave 1-ulp asymmetry.
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix(std::move(rho));
}

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return ((u.adjoint() * u) - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

CMatrix bloch_projector(const Eigen::Vector3d& n) {
  Eigen::Matrix2cd p = Eigen::Matrix2cd::Identity();
  p += n.x() * pauli_x() + n.y() * pauli_y() + n.z() * pauli_z();
  return CMatrix(0.5 * p);
}

}  // namespace fuzzytomo
