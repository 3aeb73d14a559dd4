#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace frfvib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One odd-polynomial stiffness term b * q^(2p+1) acting on a single DOF.
struct NonlinearTerm {
  int order = 1;             // p >= 1
  double coefficient = 0.0;  // b_{i,2p+1} >= 0
};

/// Multi-degree-of-freedom mechanical system
///
///   M q'' + C q' + K q + Phi(q) = Lambda w + Gamma u
///
/// with a displacement-only odd polynomial nonlinearity
/// Phi_i(q) = sum_p b_{i,2p+1} q_i^{2p+1}. Immutable after construction.
class MdofSystem {
 public:
  /// Validates dimensions, symmetric positive definiteness of M, C, K and
  /// the sign of every nonlinear coefficient. Zero coefficients are dropped.
  /// Throws ArgumentError on any violation.
  MdofSystem(Matrix mass, Matrix damping, Matrix stiffness,
             std::vector<std::vector<NonlinearTerm>> nonlinearity,
             Vector input_influence,
             std::optional<Matrix> actuator_map = std::nullopt);

  int dof() const noexcept { return static_cast<int>(mass_.rows()); }
  int state_dim() const noexcept { return 2 * dof(); }

  const Matrix& mass() const noexcept { return mass_; }
  const Matrix& mass_inverse() const noexcept { return mass_inverse_; }
  const Matrix& damping() const noexcept { return damping_; }
  const Matrix& stiffness() const noexcept { return stiffness_; }
  const Vector& input_influence() const noexcept { return input_influence_; }
  const Matrix& actuator_map() const noexcept { return actuator_map_; }
  const std::vector<std::vector<NonlinearTerm>>& nonlinearity() const noexcept {
    return nonlinearity_;
  }

  bool is_linear() const noexcept;

  /// Sum of the cubic (p = 1) coefficients on DOF i; 0 when absent.
  double cubic_coefficient(int i) const;

 private:
  Matrix mass_;
  Matrix mass_inverse_;
  Matrix damping_;
  Matrix stiffness_;
  std::vector<std::vector<NonlinearTerm>> nonlinearity_;
  Vector input_influence_;
  Matrix actuator_map_;
};

/// Harmonic excitation w(t) = a sin(omega t + phase).
struct HarmonicInput {
  double amplitude = 1.0;
  double omega = 1.0;
  double phase = 0.0;

  /// Throws ArgumentError unless amplitude > 0 and omega > 0.
  void validate() const;
  double at(double t) const;
  double period() const;
};

/// Phi(q). Throws ArgumentError on dimension mismatch.
Vector eval_nonlinearity(const MdofSystem& system, const Vector& q);

/// dPhi/dq, a diagonal matrix with non-negative entries.
Matrix eval_nonlinearity_jacobian(const MdofSystem& system, const Vector& q);

/// State derivative of the (optionally controlled) system for x = (q, q').
/// `w` is either a scalar (length 1, multiplied by Lambda) or an n_q force
/// vector applied directly; `u` is the n_q actuator command.
Vector eval_dynamics(const MdofSystem& system, const Vector& x, const Vector& w,
                     const Vector& u);

/// Scalar-excitation convenience overload.
Vector eval_dynamics(const MdofSystem& system, const Vector& x, double w,
                     const Vector& u);

enum class DuffingVariant {
  Nominal,  // k_c = 36 N/m
  Figure,   // k_c = 100 N/m
  Linear,   // k_c = 0
};

/// Single-DOF cubic-stiffness oscillator: m = 1 kg, c = 0.4 N s/m, k = 36 N/m.
MdofSystem duffing_preset(DuffingVariant variant = DuffingVariant::Nominal);

}  // namespace frfvib
