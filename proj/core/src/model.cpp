#include "frfvib/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

void require_square(const Matrix& m, int n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << m.rows() << "x"
       << m.cols();
    throw ArgumentError(os.str());
  }
}

void require_spd(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw ArgumentError(std::string(name) + " has non-finite entries");
  const Matrix asym = m - m.transpose();
  if (asym.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ArgumentError(std::string(name) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()),
                                            Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > 1e-12 * hi)) {
    throw ArgumentError(std::string(name) + " is not positive definite");
  }
}

void require_dim(const Vector& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << " has dimension " << v.size() << ", expected " << n;
    throw ArgumentError(os.str());
  }
}

}  // namespace

MdofSystem::MdofSystem(Matrix mass, Matrix damping, Matrix stiffness,
                       std::vector<std::vector<NonlinearTerm>> nonlinearity,
                       Vector input_influence, std::optional<Matrix> actuator_map)
    : mass_(std::move(mass)),
      damping_(std::move(damping)),
      stiffness_(std::move(stiffness)),
      input_influence_(std::move(input_influence)) {
  const int n = static_cast<int>(mass_.rows());
  if (n < 1) throw ArgumentError("system needs at least one degree of freedom");
  require_square(mass_, n, "mass matrix");
  require_square(damping_, n, "damping matrix");
  require_square(stiffness_, n, "stiffness matrix");
  require_spd(mass_, "mass matrix");
  require_spd(damping_, "damping matrix");
  require_spd(stiffness_, "stiffness matrix");
  require_dim(input_influence_, n, "input influence");
  if (!input_influence_.allFinite()) throw ArgumentError("input influence is not finite");

  if (nonlinearity.empty()) nonlinearity.resize(n);
  if (static_cast<int>(nonlinearity.size()) != n) {
    throw ArgumentError("nonlinearity must list one entry per degree of freedom");
  }
  nonlinearity_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& term : nonlinearity[i]) {
      if (term.order < 1) throw ArgumentError("nonlinear term order must be >= 1");
      if (!std::isfinite(term.coefficient) || term.coefficient < 0.0) {
        throw ArgumentError("nonlinear coefficients must be finite and non-negative");
      }
      if (term.coefficient > 0.0) nonlinearity_[i].push_back(term);
    }
  }

  if (actuator_map) {
    require_square(*actuator_map, n, "actuator map");
    actuator_map_ = std::move(*actuator_map);
  } else {
    actuator_map_ = Matrix::Identity(n, n);
  }
  mass_inverse_ = mass_.llt().solve(Matrix::Identity(n, n));
}

bool MdofSystem::is_linear() const noexcept {
  for (const auto& terms : nonlinearity_) {
    if (!terms.empty()) return false;
  }
  return true;
}

double MdofSystem::cubic_coefficient(int i) const {
  if (i < 0 || i >= dof()) throw ArgumentError("degree-of-freedom index out of range");
  double b = 0.0;
  for (const auto& t : nonlinearity_[i]) {
    if (t.order == 1) b += t.coefficient;
  }
  return b;
}

void HarmonicInput::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ArgumentError("harmonic amplitude must be positive");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ArgumentError("harmonic frequency must be positive");
  }
}

double HarmonicInput::at(double t) const { return amplitude * std::sin(omega * t + phase); }

double HarmonicInput::period() const { return 2.0 * std::numbers::pi / omega; }

Vector eval_nonlinearity(const MdofSystem& system, const Vector& q) {
  require_dim(q, system.dof(), "displacement");
  Vector phi = Vector::Zero(system.dof());
  for (int i = 0; i < system.dof(); ++i) {
    for (const auto& t : system.nonlinearity()[i]) {
      phi[i] += t.coefficient * std::pow(q[i], 2 * t.order + 1);
    }
  }
  return phi;
}

Matrix eval_nonlinearity_jacobian(const MdofSystem& system, const Vector& q) {
  require_dim(q, system.dof(), "displacement");
  Matrix jac = Matrix::Zero(system.dof(), system.dof());
  for (int i = 0; i < system.dof(); ++i) {
    for (const auto& t : system.nonlinearity()[i]) {
      jac(i, i) += (2 * t.order + 1) * t.coefficient * std::pow(q[i], 2 * t.order);
    }
  }
  return jac;
}

Vector eval_dynamics(const MdofSystem& system, const Vector& x, const Vector& w,
                     const Vector& u) {
  const int n = system.dof();
  require_dim(x, 2 * n, "state");
  require_dim(u, n, "control");
  Vector force;
  if (w.size() == 1) {
    force = system.input_influence() * w[0];
  } else {
    require_dim(w, n, "excitation");
    force = w;
  }
  const auto q = x.head(n);
  const auto qd = x.tail(n);
  Vector dx(2 * n);
  dx.head(n) = qd;
  dx.tail(n) = -system.mass_inverse() *
               (system.damping() * qd + system.stiffness() * q +
                eval_nonlinearity(system, q) - force - system.actuator_map() * u);
  return dx;
}

Vector eval_dynamics(const MdofSystem& system, const Vector& x, double w,
                     const Vector& u) {
  return eval_dynamics(system, x, Vector::Constant(1, w), u);
}

MdofSystem duffing_preset(DuffingVariant variant) {
  double kc = 36.0;
  if (variant == DuffingVariant::Figure) kc = 100.0;
  if (variant == DuffingVariant::Linear) kc = 0.0;
  std::vector<std::vector<NonlinearTerm>> nl(1);
  nl[0].push_back({1, kc});
  return MdofSystem(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.4),
                    Matrix::Constant(1, 1, 36.0), nl, Vector::Ones(1));
}

}  // namespace frfvib
