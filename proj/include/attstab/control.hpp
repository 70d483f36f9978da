#pragma once

// Open-loop and saturated-feedback simulation of chi' = A chi + B u with a
// classical fixed-step RK4 integrator.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "attstab/errors.hpp"
#include "attstab/model.hpp"
#include "attstab/smallmat.hpp"

namespace attstab {

using State = std::array<double, 6>;
using Control = std::array<double, 3>;

inline double energy(const State& x, const Matrix& p) {
  if (p.rows() != 6 || p.cols() != 6) throw ShapeError("energy needs a 6x6 weight");
  double v = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 6; ++j) row += p(i, j) * x[j];
    v += x[i] * row;
  }
  return v;
}

/// u = sat(-kappa B^T P chi), clamped per axis to [-u_max, u_max].
class SaturatedFeedback {
 public:
  SaturatedFeedback(Matrix p, double kappa = 1.0, Control u_max = {0.1, 0.1, 0.1})
      : p_(std::move(p)), kappa_(kappa), u_max_(u_max) {
    if (p_.rows() != 6 || p_.cols() != 6) throw ShapeError("feedback weight must be 6x6");
    if (!is_positive_definite(p_)) throw DomainError("feedback weight must be positive definite");
    if (!(kappa_ > 0.0) || !std::isfinite(kappa_)) throw DomainError("feedback gain must be > 0");
    for (double u : u_max_) {
      if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("torque limits must be > 0");
    }
  }

  const Matrix& weight() const noexcept { return p_; }
  double kappa() const noexcept { return kappa_; }
  const Control& u_max() const noexcept { return u_max_; }

 private:
  Matrix p_;
  double kappa_;
  Control u_max_;
};

inline Control feedback(const State& x, const SaturatedFeedback& fb, const Matrix& b) {
  if (b.rows() != 6 || b.cols() != 3) throw ShapeError("input matrix must be 6x3");
  const Matrix& p = fb.weight();
  State px{};
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) px[i] += p(i, j) * x[j];
  }
  Control u{};
  for (std::size_t k = 0; k < 3; ++k) {
    double btpx = 0.0;
    for (std::size_t i = 0; i < 6; ++i) btpx += b(i, k) * px[i];
    // Adding +0.0 turns a signed zero into +0 so files never show "-0".
    u[k] = std::clamp(-fb.kappa() * btpx, -fb.u_max()[k], fb.u_max()[k]) + 0.0;
  }
  return u;
}

/// ||B^T P B||_inf: the rate at which the unsaturated loop acts on the rates.
/// RK4 resolves the closed loop only while kappa * loop_gain * dt stays O(1);
/// P's rate block grows like 1/omega0^2, so this is large in slow orbits.
inline double loop_gain(const Matrix& p, const Matrix& b) {
  if (p.rows() != 6 || p.cols() != 6 || b.rows() != 6 || b.cols() != 3) {
    throw ShapeError("loop_gain needs a 6x6 weight and a 6x3 input matrix");
  }
  return inf_norm(mat_mul(mat_mul(transpose(b), p), b));
}

struct Trajectory {
  std::vector<double> t;
  std::vector<State> x;
  std::vector<Control> u;
  std::vector<double> v;

  std::size_t size() const noexcept { return t.size(); }
};

/// Steps must resolve the orbital timescale: dt <= 0.01 / omega0.
inline constexpr double kResolutionGuard = 0.01;

/// Integrates from x0 over `horizon` seconds with step dt. Feedback, when
/// present, is evaluated at every RK4 stage. Energies use `energy_weight`,
/// falling back to the feedback weight and then to the identity.
inline Trajectory simulate(const SystemMatrices& sys, const std::optional<SaturatedFeedback>& fb,
                           const State& x0, double dt, double horizon,
                           const std::optional<Matrix>& energy_weight = std::nullopt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw StepSizeError("dt must be positive");
  if (sys.rate.omega0 > 0.0 && dt > kResolutionGuard / sys.rate.omega0) {
    throw StepSizeError("dt exceeds 0.01 / omega0");
  }
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw StepSizeError("horizon must be >= dt");

  const Matrix weight = energy_weight ? *energy_weight
                        : fb          ? fb->weight()
                                      : Matrix::identity(6);
  const Matrix& a = sys.a;
  const Matrix& b = sys.b;

  auto control_at = [&](const State& x) -> Control {
    return fb ? feedback(x, *fb, b) : Control{};
  };
  auto rhs = [&](const State& x) {
    const Control u = control_at(x);
    State dx{};
    for (std::size_t i = 0; i < 6; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 6; ++j) s += a(i, j) * x[j];
      for (std::size_t k = 0; k < 3; ++k) s += b(i, k) * u[k];
      dx[i] = s;
    }
    return dx;
  };
  auto axpy = [](const State& x, double h, const State& k) {
    State out;
    for (std::size_t i = 0; i < 6; ++i) out[i] = x[i] + h * k[i];
    return out;
  };

  // Tolerate rounding in horizon / dt so an exact multiple is not padded.
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));

  Trajectory tr;
  tr.t.reserve(steps + 1);
  tr.x.reserve(steps + 1);
  tr.u.reserve(steps + 1);
  tr.v.reserve(steps + 1);

  State x = x0;
  for (std::size_t n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    for (double xi : x) {
      if (!std::isfinite(xi)) {
        throw DivergenceError("state became non-finite at t = " + std::to_string(t), t);
      }
    }
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.u.push_back(control_at(x));
    tr.v.push_back(energy(x, weight));
    if (n == steps) break;

    const State k1 = rhs(x);
    const State k2 = rhs(axpy(x, dt / 2.0, k1));
    const State k3 = rhs(axpy(x, dt / 2.0, k2));
    const State k4 = rhs(axpy(x, dt, k3));
    for (std::size_t i = 0; i < 6; ++i) {
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return tr;
}

}  // namespace attstab
