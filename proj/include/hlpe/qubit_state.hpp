#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace hlpe {

// Largest |A - A^dag| entry.
template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// Eigenvalues of the Hermitian part, ascending.
template <typename Derived>
auto hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  Plain h = (a + a.adjoint()) / typename Derived::RealScalar(2);
  return Eigen::SelfAdjointEigenSolver<Plain>(h, Eigen::EigenvaluesOnly).eigenvalues().eval();
}

// Density matrix on n dual-rail qubits. Index bit (n-1-q) belongs to qubit q,
// so the first qubit is the first Kronecker factor.
class QubitState {
 public:
  // Validates Hermiticity, unit trace and positivity against `tol`.
  explicit QubitState(Eigen::MatrixXcd rho, double tol = 1e-9);

  static QubitState from_ket(const Eigen::VectorXcd& ket, double tol = 1e-9);
  static QubitState maximally_mixed(int qubits);

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  int qubits() const { return qubits_; }

 private:
  Eigen::MatrixXcd rho_;
  int qubits_;
};

// Qubit count for a power-of-two dimension; throws otherwise.
int qubits_for_dimension(std::size_t dim);

}  // namespace hlpe
