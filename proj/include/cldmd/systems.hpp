#ifndef CLDMD_SYSTEMS_HPP
#define CLDMD_SYSTEMS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "cldmd/dataset.hpp"

namespace cldmd {

/// Right-hand side of a control-affine system, xdot = rhs(x, u).
using ControlRhs =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Controlled Duffing oscillator:
///   x1dot = x2, x2dot = x1 - x1^3 + (2 + sin(x1)) u.
Eigen::VectorXd duffing_rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u);

/// Planar two-link manipulator parameters (inertia, Coriolis, friction).
struct TwoLinkParams {
  double p1 = 3.473;   // kg m^2
  double p2 = 0.196;   // kg m^2
  double p3 = 0.242;   // kg m^2
  double fd1 = 5.3;    // kg m / s
  double fd2 = 1.1;
  double fs1 = 8.45;
  double fs2 = 2.35;

  Eigen::Matrix2d inertia(double q2) const;
};

/// Two-link manipulator dynamics with state x = (q1, q2, q1dot, q2dot) and
/// torque input u: M(q) qddot + Vm(q, qdot) qdot + F(qdot) = u.
Eigen::VectorXd twolink_rhs(const TwoLinkParams& p,
                            const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u);

/// Linear system xdot = A x + B u, used as an analytically solvable
/// reference.
struct LinearSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

/// Bounded open-loop excitation signal.
struct ExcitationSignal {
  enum class Kind { zero, sum_of_sinusoids, piecewise_constant };

  Kind kind = Kind::zero;
  int channels = 1;

  // sum_of_sinusoids: per channel, component lists of equal length
  std::vector<std::vector<double>> amplitudes;
  std::vector<std::vector<double>> omegas;  // rad/s
  std::vector<std::vector<double>> phases;

  // piecewise_constant
  std::vector<Eigen::VectorXd> levels;
  double dwell = 0.0;

  static ExcitationSignal zero_signal(int channels);
  static ExcitationSignal sinusoids(std::vector<std::vector<double>> amplitudes,
                                    std::vector<std::vector<double>> omegas,
                                    std::vector<std::vector<double>> phases);
  static ExcitationSignal piecewise(std::vector<Eigen::VectorXd> levels,
                                    double dwell);

  Eigen::VectorXd eval(double t) const;
};

Eigen::VectorXd eval_signal(const ExcitationSignal& sig, double t);

/// Deterministic sinusoidal excitation for one trajectory: `components`
/// sinusoids per channel with amplitudes in amp_range, frequencies (Hz) in
/// freq_range and phases in [0, 2pi), all drawn from a splitmix64 stream
/// keyed by (seed, trajectory_index).
ExcitationSignal sinusoid_excitation(int channels, int components,
                                     double amp_lo, double amp_hi,
                                     double freq_lo_hz, double freq_hi_hz,
                                     std::uint64_t seed,
                                     std::uint64_t trajectory_index);

/// Fixed-step classical RK4 under an open-loop signal u(t); the control is
/// evaluated at each stage time. Samples (state and input) are recorded at
/// sample_hz; internal_step must divide the sample period.
SampledTrajectory simulate_openloop(const ControlRhs& rhs,
                                    const Eigen::VectorXd& x0,
                                    const std::function<Eigen::VectorXd(double)>& u,
                                    double duration, double sample_hz,
                                    double internal_step);

SampledTrajectory simulate_openloop(const ControlRhs& rhs,
                                    const Eigen::VectorXd& x0,
                                    const ExcitationSignal& sig,
                                    double duration, double sample_hz,
                                    double internal_step);

/// Closed-loop simulation with u = mu(x) evaluated at every RK4 stage.
SampledTrajectory simulate_closedloop(const ControlRhs& rhs,
                                      const Eigen::VectorXd& x0,
                                      const FeedbackLaw& law, double duration,
                                      double sample_hz, double internal_step);

/// Regular grid of per_side^dim points with coordinates linearly spaced in
/// [-half_width, half_width]; one point per row, last coordinate fastest.
Eigen::MatrixXd grid_initial_conditions(int per_side, double half_width,
                                        int dim);

/// Halton points (bases 2,3,5,7,11,13; index starts at 1) mapped from
/// (0,1)^dim to [-half_width, half_width]^dim. One point per row.
Eigen::MatrixXd halton_points(int count, int dim, double half_width);

}  // namespace cldmd

#endif
