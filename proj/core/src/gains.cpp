#include "frfvib/gains.hpp"

#include <cmath>

#include "frfvib/errors.hpp"

namespace frfvib {

PdGains PdGains::zero(int n) { return {Matrix::Zero(n, n), Matrix::Zero(n, n)}; }

PdGains PdGains::diagonal(const Vector& p, const Vector& d) {
  if (p.size() != d.size()) throw ArgumentError("gain vectors differ in length");
  return {p.asDiagonal().toDenseMatrix(), d.asDiagonal().toDenseMatrix()};
}

void PdGains::validate(int n) const {
  for (const Matrix* m : {&theta_p, &theta_d}) {
    if (m->rows() != n || m->cols() != n) throw ArgumentError("gain matrix has wrong shape");
    if (!m->allFinite()) throw ArgumentError("gain matrix is not finite");
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m->cwiseAbs().maxCoeff())) {
      throw ArgumentError("gain matrix is not symmetric");
    }
  }
}

Vector pd_control(const PdGains& gains, const Vector& q, const Vector& qdot) {
  if (q.size() != gains.dim() || qdot.size() != gains.dim()) {
    throw ArgumentError("state dimension does not match gains");
  }
  return -gains.theta_p * q - gains.theta_d * qdot;
}

VectorField closed_loop_field(const MdofSystem& system, const PdGains& gains,
                              std::function<double(double)> excitation) {
  const int n = system.dof();
  gains.validate(n);
  const Matrix& g = system.actuator_map();
  Matrix k_eff = system.stiffness() + g * gains.theta_p;
  Matrix c_eff = system.damping() + g * gains.theta_d;
  Vector lambda = system.input_influence();
  Matrix m_inv = system.mass_inverse();
  std::vector<std::vector<NonlinearTerm>> nl = system.nonlinearity();
  Vector force(n);
  return [=](double t, const Vector& x, Vector& dx) mutable {
    const auto q = x.head(n);
    const auto v = x.tail(n);
    force.noalias() = lambda * excitation(t);
    force.noalias() -= c_eff * v;
    force.noalias() -= k_eff * q;
    for (int i = 0; i < n; ++i) {
      for (const auto& term : nl[i]) {
        force[i] -= term.coefficient * std::pow(q[i], 2 * term.order + 1);
      }
    }
    dx.head(n) = v;
    dx.tail(n).noalias() = m_inv * force;
  };
}

}  // namespace frfvib
