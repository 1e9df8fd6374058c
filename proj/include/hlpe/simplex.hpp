#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace hlpe {

struct SimplexResult {
  Eigen::VectorXd x;
  double value;
  std::size_t evaluations;
  bool converged;
};

// Nelder-Mead minimization with standard coefficients. Stops when the spread
// of simplex values falls below `tol` or after `max_evals` evaluations.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, double tol,
                          std::size_t max_evals);

}  // namespace hlpe
