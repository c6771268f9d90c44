#pragma once

#include <stdexcept>

#include "avcredit/types.hpp"

namespace avcredit {

/// Raised when a positive correction is requested from an agent whose
/// constraint row is (numerically) zero.
class UncontrollableCorrection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splits the deficit S among credit holders: Delta_i = (1 - c_i) S / sum_j (1 - c_j).
/// A single participant carries the whole deficit.
VectorXd credit_to_correction(const VectorXd& credits, double deficit);

/// Minimum-norm control meeting a_i (u - u_nominal) = delta, i.e.
/// u = u_nominal + a_i^T delta / (a_i a_i^T).
VectorXd synthesize_control(const VectorXd& nominal, const RowVectorXd& a_i, double delta);

/// Scalar-control form used by the unicycle agents.
double synthesize_control(double nominal, double a_i, double delta);

/// Closest control to `nominal` (Euclidean) satisfying a_row u >= b.
VectorXd qp_baseline(const VectorXd& nominal, const RowVectorXd& a_row, double b);

}  // namespace avcredit
