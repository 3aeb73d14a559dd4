#pragma once

#include <optional>
#include <string>

#include "frfvib/gains.hpp"
#include "frfvib/model.hpp"

namespace frfvib {

/// [[0, I], [-M^-1 (K + Phi_J(q)), -M^-1 C]]
Matrix jacobian_open_loop(const MdofSystem& system, const Vector& x);

/// Same with K + theta_p and C + theta_d (gains act through the actuator map).
Matrix jacobian_closed_loop(const MdofSystem& system, const PdGains& gains, const Vector& x);

/// [[I, 0], [I, I]] for n_q degrees of freedom.
Matrix transformation_matrix(int dof);

/// Upsilon J Upsilon^-1 for a constant transform. Throws ArgumentError if singular.
Matrix generalized_jacobian(const Matrix& jacobian, const Matrix& transform);

enum class Definiteness { UniformlyNegative, Indefinite, PositiveSomewhere };

std::string to_string(Definiteness d);

struct DefinitenessResult {
  double lambda_max_sym = 0.0;
  Definiteness verdict = Definiteness::Indefinite;
};

/// Largest eigenvalue of (A + A^T)/2. Negative iff below -1e-10, positive
/// somewhere iff above +1e-10 (only reachable when the matrix itself is
/// positive definite), indefinite otherwise.
DefinitenessResult definiteness_diagnostic(const Matrix& a);

struct StateBox {
  Vector lower;
  Vector upper;
};

struct JacobianReport {
  double lambda_max_sym = 0.0;
  Vector worst_state;
  Definiteness verdict = Definiteness::Indefinite;
  int samples = 0;
};

/// Evaluates the (optionally transformed) Jacobian on a Halton sample of the box and
/// reports the worst symmetric-part eigenvalue.
JacobianReport sample_region_check(const MdofSystem& system,
                                   const std::optional<PdGains>& gains,
                                   const StateBox& box, int n_samples,
                                   const std::optional<Matrix>& transform);

}  // namespace frfvib
