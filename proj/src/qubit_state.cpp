#include "hlpe/qubit_state.hpp"

#include <cmath>
#include <string>

#include "hlpe/errors.hpp"

namespace hlpe {

int qubits_for_dimension(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw ConfigError("density matrix dimension " + std::to_string(dim) +
                      " is not a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

QubitState::QubitState(Eigen::MatrixXcd rho, double tol) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw ConfigError("density matrix is not square");
  qubits_ = qubits_for_dimension(static_cast<std::size_t>(rho_.rows()));
  if (!rho_.allFinite()) throw NumericError("density matrix has non-finite entries");
  if (hermiticity_defect(rho_) > tol) throw NumericError("density matrix is not Hermitian");
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > tol) {
    throw NumericError("density matrix trace " + std::to_string(tr) + " differs from 1");
  }
  const double lo = hermitian_eigenvalues(rho_).minCoeff();
  if (lo < -tol) {
    throw NumericError("density matrix has negative eigenvalue " + std::to_string(lo));
  }
}

QubitState QubitState::from_ket(const Eigen::VectorXcd& ket, double tol) {
  if (std::abs(ket.squaredNorm() - 1.0) > tol) throw ConfigError("ket is not normalized");
  return QubitState(ket * ket.adjoint(), tol);
}

QubitState QubitState::maximally_mixed(int qubits) {
  const auto d = Eigen::Index{1} << qubits;
  return QubitState(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

}  // namespace hlpe
