#include "avcredit/allocation.hpp"

#include <cmath>

#include "avcredit/safety.hpp"

namespace avcredit {

VectorXd credit_to_correction(const VectorXd& credits, double deficit) {
  const Eigen::Index n = credits.size();
  if (n == 0) throw InvalidInput("credit_to_correction: no participants");
  if (!std::isfinite(deficit)) throw InvalidInput("credit_to_correction: non-finite deficit");
  if (n == 1) return VectorXd::Constant(1, deficit);
  if ((credits.array() < 0.0).any() || (credits.array() > 1.0).any()) {
    throw InvalidInput("credit_to_correction: credit outside [0, 1]");
  }
  if (credits.sum() > 1.0 + 1e-9) throw InvalidInput("credit_to_correction: credits sum above 1");

  const VectorXd relief = (1.0 - credits.array()).matrix();
  // sum(1 - c) >= n - 1 >= 1 whenever sum(c) <= 1.
  return relief * (deficit / relief.sum());
}

VectorXd synthesize_control(const VectorXd& nominal, const RowVectorXd& a_i, double delta) {
  if (nominal.size() != a_i.size()) throw InvalidInput("synthesize_control: size mismatch");
  if (delta == 0.0) return nominal;
  const double norm_sq = a_i.squaredNorm();
  if (std::sqrt(norm_sq) <= kUncontrollableNorm) {
    throw UncontrollableCorrection("synthesize_control: agent has no authority over the constraint");
  }
  return nominal + a_i.transpose() * (delta / norm_sq);
}

double synthesize_control(double nominal, double a_i, double delta) {
  if (delta == 0.0) return nominal;
  if (std::abs(a_i) <= kUncontrollableNorm) {
    throw UncontrollableCorrection("synthesize_control: agent has no authority over the constraint");
  }
  return nominal + delta / a_i;
}

VectorXd qp_baseline(const VectorXd& nominal, const RowVectorXd& a_row, double b) {
  if (nominal.size() != a_row.size()) throw InvalidInput("qp_baseline: size mismatch");
  const double slack = b - a_row.dot(nominal.transpose());
  if (slack <= 0.0) return nominal;
  const double norm_sq = a_row.squaredNorm();
  if (std::sqrt(norm_sq) <= kUncontrollableNorm) {
    throw UncontrollableCorrection("qp_baseline: violated constraint with zero control authority");
  }
  return nominal + a_row.transpose() * (slack / norm_sq);
}

}  // namespace avcredit
