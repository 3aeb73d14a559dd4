#include "frfvib/convergence.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

constexpr double kDefiniteTol = 1e-10;

Matrix assemble(const MdofSystem& s, const Matrix& k_eff, const Matrix& c_eff) {
  const int n = s.dof();
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -s.mass_inverse() * k_eff;
  j.bottomRightCorner(n, n) = -s.mass_inverse() * c_eff;
  return j;
}

double radical_inverse(long long index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

int nth_prime(int i) {
  static const std::array<int, 40> primes = {
      2,  3,  5,  7,  11, 13, 17, 19, 23, 29,  31,  37,  41,  43,  47,  53,  59,  61,  67,  71,
      73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173};
  if (i >= static_cast<int>(primes.size())) throw ArgumentError("state dimension too large for region sampling");
  return primes[i];
}

}  // namespace

Matrix jacobian_open_loop(const MdofSystem& system, const Vector& x) {
  if (x.size() != system.state_dim()) throw ArgumentError("state dimension mismatch");
  const Vector q = x.head(system.dof());
  return assemble(system, system.stiffness() + eval_nonlinearity_jacobian(system, q),
                  system.damping());
}

Matrix jacobian_closed_loop(const MdofSystem& system, const PdGains& gains, const Vector& x) {
  if (x.size() != system.state_dim()) throw ArgumentError("state dimension mismatch");
  gains.validate(system.dof());
  const Vector q = x.head(system.dof());
  const Matrix& g = system.actuator_map();
  return assemble(system,
                  system.stiffness() + g * gains.theta_p + eval_nonlinearity_jacobian(system, q),
                  system.damping() + g * gains.theta_d);
}

Matrix transformation_matrix(int dof) {
  if (dof < 1) throw ArgumentError("dof must be >= 1");
  Matrix t = Matrix::Identity(2 * dof, 2 * dof);
  t.bottomLeftCorner(dof, dof).setIdentity();
  return t;
}

Matrix generalized_jacobian(const Matrix& jacobian, const Matrix& transform) {
  if (jacobian.rows() != jacobian.cols() || transform.rows() != jacobian.rows() ||
      transform.cols() != jacobian.cols()) {
    throw ArgumentError("jacobian and transform must be square and of equal size");
  }
  Eigen::FullPivLU<Matrix> lu(transform);
  if (!lu.isInvertible()) throw ArgumentError("transform is singular");
  return transform * jacobian * lu.inverse();
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::UniformlyNegative: return "uniformly-negative";
    case Definiteness::Indefinite: return "indefinite";
    case Definiteness::PositiveSomewhere: return "positive-somewhere";
  }
  return "unknown";
}

DefinitenessResult definiteness_diagnostic(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ArgumentError("matrix must be square");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  DefinitenessResult r;
  r.lambda_max_sym = eig.eigenvalues().maxCoeff();
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (r.lambda_max_sym < -kDefiniteTol) {
    r.verdict = Definiteness::UniformlyNegative;
  } else if (lambda_min > kDefiniteTol) {
    r.verdict = Definiteness::PositiveSomewhere;
  } else {
    r.verdict = Definiteness::Indefinite;
  }
  return r;
}

JacobianReport sample_region_check(const MdofSystem& system,
                                   const std::optional<PdGains>& gains,
                                   const StateBox& box, int n_samples,
                                   const std::optional<Matrix>& transform) {
  const int dim = system.state_dim();
  if (box.lower.size() != dim || box.upper.size() != dim) {
    throw ArgumentError("state box dimension mismatch");
  }
  if (!box.lower.allFinite() || !box.upper.allFinite() ||
      (box.upper - box.lower).minCoeff() < 0.0) {
    throw ArgumentError("state box bounds must be finite and ordered");
  }
  if (n_samples < 1) throw ArgumentError("n_samples must be >= 1");

  JacobianReport rep;
  rep.lambda_max_sym = -std::numeric_limits<double>::infinity();
  bool any_positive_definite = false;
  Vector x(dim);
  for (int s = 0; s < n_samples; ++s) {
    for (int d = 0; d < dim; ++d) {
      // index 0 of the Halton sequence is the lower corner; start at 1 to stay interior
      const double u = radical_inverse(s + 1, nth_prime(d));
      x[d] = box.lower[d] + u * (box.upper[d] - box.lower[d]);
    }
    Matrix j = gains ? jacobian_closed_loop(system, *gains, x) : jacobian_open_loop(system, x);
    if (transform) j = generalized_jacobian(j, *transform);
    const auto r = definiteness_diagnostic(j);
    if (r.verdict == Definiteness::PositiveSomewhere) any_positive_definite = true;
    if (r.lambda_max_sym > rep.lambda_max_sym) {
      rep.lambda_max_sym = r.lambda_max_sym;
      rep.worst_state = x;
    }
  }
  rep.samples = n_samples;
  if (rep.lambda_max_sym < -kDefiniteTol) {
    rep.verdict = Definiteness::UniformlyNegative;
  } else if (any_positive_definite) {
    rep.verdict = Definiteness::PositiveSomewhere;
  } else {
    rep.verdict = Definiteness::Indefinite;
  }
  return rep;
}

}  // namespace frfvib
