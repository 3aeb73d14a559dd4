#pragma once

#include <functional>

#include "frfvib/integrator.hpp"
#include "frfvib/model.hpp"

namespace frfvib {

/// Proportional and derivative gain matrices of u = -theta_p q - theta_d q'.
struct PdGains {
  Matrix theta_p;
  Matrix theta_d;

  static PdGains zero(int n);
  static PdGains diagonal(const Vector& p, const Vector& d);

  int dim() const noexcept { return static_cast<int>(theta_p.rows()); }
  Vector p_diagonal() const { return theta_p.diagonal(); }
  Vector d_diagonal() const { return theta_d.diagonal(); }

  /// Throws ArgumentError unless both matrices are n x n, symmetric and finite.
  void validate(int n) const;
};

Vector pd_control(const PdGains& gains, const Vector& q, const Vector& qdot);

/// State equation of the PD-controlled system driven by the scalar excitation w(t).
VectorField closed_loop_field(const MdofSystem& system, const PdGains& gains,
                              std::function<double(double)> excitation);

}  // namespace frfvib
