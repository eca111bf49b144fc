#include "cldmd/systems.hpp"

#include <cmath>
#include <sstream>

#include "cldmd/errors.hpp"

namespace cldmd {

Eigen::VectorXd duffing_rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (x.size() != 2 || u.size() != 1) {
    throw std::invalid_argument("duffing_rhs: expects x in R^2, u in R^1");
  }
  Eigen::VectorXd dx(2);
  dx[0] = x[1];
  dx[1] = x[0] - x[0] * x[0] * x[0] + (2.0 + std::sin(x[0])) * u[0];
  return dx;
}

Eigen::Matrix2d TwoLinkParams::inertia(double q2) const {
  const double c2 = std::cos(q2);
  Eigen::Matrix2d m;
  m << p1 + 2.0 * p3 * c2, p2 + p3 * c2, p2 + p3 * c2, p2;
  return m;
}

Eigen::VectorXd twolink_rhs(const TwoLinkParams& p,
                            const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (x.size() != 4 || u.size() != 2) {
    throw std::invalid_argument("twolink_rhs: expects x in R^4, u in R^2");
  }
  const double q2 = x[1];
  const Eigen::Vector2d qdot(x[2], x[3]);
  const double s2 = std::sin(q2);

  const Eigen::Matrix2d m = p.inertia(q2);
  Eigen::Matrix2d vm;
  vm << p.p3 * s2 * qdot[1], -p.p3 * s2 * (qdot[0] + qdot[1]),
      p.p3 * s2 * qdot[0], 0.0;
  Eigen::Vector2d friction(p.fd1 * qdot[0] + p.fs1 * std::tanh(qdot[0]),
                           p.fd2 * qdot[1] + p.fs2 * std::tanh(qdot[1]));

  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (det < 1e-9) {
    std::ostringstream os;
    os << "twolink_rhs: inertia matrix nearly singular (det " << det
       << " at q2 = " << q2 << ")";
    throw singular_matrix_error(os.str());
  }
  Eigen::Matrix2d minv;
  minv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  minv /= det;

  const Eigen::Vector2d qddot = minv * (u - vm * qdot - friction);
  Eigen::VectorXd dx(4);
  dx << qdot[0], qdot[1], qddot[0], qddot[1];
  return dx;
}

Eigen::VectorXd LinearSystem::rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return a * x + b * u;
}

ExcitationSignal ExcitationSignal::zero_signal(int channels) {
  ExcitationSignal s;
  s.kind = Kind::zero;
  s.channels = channels;
  return s;
}

ExcitationSignal ExcitationSignal::sinusoids(
    std::vector<std::vector<double>> amplitudes,
    std::vector<std::vector<double>> omegas,
    std::vector<std::vector<double>> phases) {
  if (amplitudes.empty() || amplitudes.size() != omegas.size() ||
      amplitudes.size() != phases.size()) {
    throw std::invalid_argument("ExcitationSignal: per-channel lists differ");
  }
  for (std::size_t c = 0; c < amplitudes.size(); ++c) {
    if (amplitudes[c].size() != omegas[c].size() ||
        amplitudes[c].size() != phases[c].size()) {
      throw std::invalid_argument(
          "ExcitationSignal: component lists differ in length");
    }
  }
  ExcitationSignal s;
  s.kind = Kind::sum_of_sinusoids;
  s.channels = static_cast<int>(amplitudes.size());
  s.amplitudes = std::move(amplitudes);
  s.omegas = std::move(omegas);
  s.phases = std::move(phases);
  return s;
}

ExcitationSignal ExcitationSignal::piecewise(std::vector<Eigen::VectorXd> levels,
                                             double dwell) {
  if (levels.empty() || !(dwell > 0.0)) {
    throw std::invalid_argument(
        "ExcitationSignal: piecewise needs levels and a positive dwell");
  }
  ExcitationSignal s;
  s.kind = Kind::piecewise_constant;
  s.channels = static_cast<int>(levels.front().size());
  s.levels = std::move(levels);
  s.dwell = dwell;
  return s;
}

Eigen::VectorXd ExcitationSignal::eval(double t) const {
  switch (kind) {
    case Kind::zero:
      return Eigen::VectorXd::Zero(channels);
    case Kind::sum_of_sinusoids: {
      Eigen::VectorXd u(channels);
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        const auto& a = amplitudes[static_cast<std::size_t>(c)];
        const auto& w = omegas[static_cast<std::size_t>(c)];
        const auto& ph = phases[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < a.size(); ++k) {
          acc += a[k] * std::sin(w[k] * t + ph[k]);
        }
        u[c] = acc;
      }
      return u;
    }
    case Kind::piecewise_constant: {
      auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(t / dwell)));
      if (idx >= levels.size()) idx = levels.size() - 1;
      return levels[idx];
    }
  }
  throw std::logic_error("ExcitationSignal: unknown kind");
}

Eigen::VectorXd eval_signal(const ExcitationSignal& sig, double t) {
  return sig.eval(t);
}

namespace {

// splitmix64; used instead of <random> distributions so draws are identical
// across standard libraries.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

ExcitationSignal sinusoid_excitation(int channels, int components,
                                     double amp_lo, double amp_hi,
                                     double freq_lo_hz, double freq_hi_hz,
                                     std::uint64_t seed,
                                     std::uint64_t trajectory_index) {
  if (channels < 1 || components < 1) {
    throw std::invalid_argument(
        "sinusoid_excitation: channels and components must be positive");
  }
  std::uint64_t state =
      seed ^ (0x9E3779B97F4A7C15ull * (trajectory_index + 1));
  std::vector<std::vector<double>> amps(static_cast<std::size_t>(channels)),
      omegas(static_cast<std::size_t>(channels)),
      phases(static_cast<std::size_t>(channels));
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (int c = 0; c < channels; ++c) {
    for (int k = 0; k < components; ++k) {
      const double a = amp_lo + (amp_hi - amp_lo) * uniform01(state);
      const double f = freq_lo_hz + (freq_hi_hz - freq_lo_hz) * uniform01(state);
      const double ph = two_pi * uniform01(state);
      amps[static_cast<std::size_t>(c)].push_back(a);
      omegas[static_cast<std::size_t>(c)].push_back(two_pi * f);
      phases[static_cast<std::size_t>(c)].push_back(ph);
    }
  }
  return ExcitationSignal::sinusoids(std::move(amps), std::move(omegas),
                                     std::move(phases));
}

namespace {

constexpr double kEscapeNorm = 1e6;

using TimeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

Eigen::VectorXd rk4_step(const TimeRhs& f, double t, const Eigen::VectorXd& x,
                         double h) {
  const Eigen::VectorXd k1 = f(t, x);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct SampleGrid {
  long long steps_per_sample = 0;
  long long n_samples = 0;
  double dt = 0.0;
};

SampleGrid make_grid(double duration, double sample_hz, double internal_step) {
  if (!(duration > 0.0) || !(sample_hz > 0.0) || !(internal_step > 0.0)) {
    throw std::invalid_argument(
        "simulate: duration, sample_hz and internal_step must be positive");
  }
  SampleGrid g;
  g.dt = 1.0 / sample_hz;
  g.steps_per_sample = std::llround(g.dt / internal_step);
  if (g.steps_per_sample < 1 ||
      std::abs(static_cast<double>(g.steps_per_sample) * internal_step - g.dt) >
          1e-9) {
    throw std::invalid_argument(
        "simulate: internal_step must divide the sample period");
  }
  g.n_samples = std::llround(duration * sample_hz) + 1;
  if (g.n_samples < 2) {
    throw std::invalid_argument("simulate: need at least one sample period");
  }
  return g;
}

SampledTrajectory run_simulation(const TimeRhs& f,
                                 const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& input_at,
                                 const Eigen::VectorXd& x0, double duration,
                                 double sample_hz, double internal_step) {
  const SampleGrid grid = make_grid(duration, sample_hz, internal_step);
  const Eigen::VectorXd u0 = input_at(0.0, x0);

  SampledTrajectory tr;
  tr.t0 = 0.0;
  tr.dt = grid.dt;
  tr.states.resize(grid.n_samples, x0.size());
  tr.controls.resize(grid.n_samples, u0.size());
  tr.states.row(0) = x0.transpose();
  tr.controls.row(0) = u0.transpose();

  Eigen::VectorXd x = x0;
  for (long long s = 1; s < grid.n_samples; ++s) {
    for (long long sub = 0; sub < grid.steps_per_sample; ++sub) {
      const double t =
          static_cast<double>((s - 1) * grid.steps_per_sample + sub) *
          internal_step;
      x = rk4_step(f, t, x, internal_step);
      if (!(x.norm() <= kEscapeNorm)) {
        std::ostringstream os;
        os << "simulate: state norm exceeded " << kEscapeNorm << " at t = "
           << t + internal_step;
        throw divergence_error(os.str(), t + internal_step);
      }
    }
    const double t_sample = static_cast<double>(s) * grid.dt;
    tr.states.row(s) = x.transpose();
    tr.controls.row(s) = input_at(t_sample, x).transpose();
  }
  return tr;
}

}  // namespace

SampledTrajectory simulate_openloop(const ControlRhs& rhs,
                                    const Eigen::VectorXd& x0,
                                    const std::function<Eigen::VectorXd(double)>& u,
                                    double duration, double sample_hz,
                                    double internal_step) {
  auto f = [&](double t, const Eigen::VectorXd& x) { return rhs(x, u(t)); };
  auto input_at = [&](double t, const Eigen::VectorXd&) { return u(t); };
  return run_simulation(f, input_at, x0, duration, sample_hz, internal_step);
}

SampledTrajectory simulate_openloop(const ControlRhs& rhs,
                                    const Eigen::VectorXd& x0,
                                    const ExcitationSignal& sig,
                                    double duration, double sample_hz,
                                    double internal_step) {
  return simulate_openloop(
      rhs, x0, [&sig](double t) { return sig.eval(t); }, duration, sample_hz,
      internal_step);
}

SampledTrajectory simulate_closedloop(const ControlRhs& rhs,
                                      const Eigen::VectorXd& x0,
                                      const FeedbackLaw& law, double duration,
                                      double sample_hz, double internal_step) {
  auto f = [&](double, const Eigen::VectorXd& x) {
    return rhs(x, law.evaluate(x));
  };
  auto input_at = [&](double, const Eigen::VectorXd& x) {
    return law.evaluate(x);
  };
  return run_simulation(f, input_at, x0, duration, sample_hz, internal_step);
}

Eigen::MatrixXd grid_initial_conditions(int per_side, double half_width,
                                        int dim) {
  if (per_side < 2) {
    throw std::invalid_argument("grid_initial_conditions: per_side >= 2");
  }
  if (dim < 1 || !(half_width > 0.0)) {
    throw std::invalid_argument(
        "grid_initial_conditions: dim and half_width must be positive");
  }
  long long total = 1;
  for (int d = 0; d < dim; ++d) total *= per_side;

  Eigen::VectorXd axis(per_side);
  for (int i = 0; i < per_side; ++i) {
    axis[i] = -half_width +
              2.0 * half_width * static_cast<double>(i) /
                  static_cast<double>(per_side - 1);
  }

  Eigen::MatrixXd points(total, dim);
  for (long long r = 0; r < total; ++r) {
    long long rem = r;
    for (int d = dim - 1; d >= 0; --d) {
      points(r, d) = axis[static_cast<int>(rem % per_side)];
      rem /= per_side;
    }
  }
  return points;
}

Eigen::MatrixXd halton_points(int count, int dim, double half_width) {
  static constexpr int bases[6] = {2, 3, 5, 7, 11, 13};
  if (count < 1) {
    throw std::invalid_argument("halton_points: count must be positive");
  }
  if (dim < 1 || dim > 6) {
    throw std::invalid_argument("halton_points: dim must be in [1, 6]");
  }
  Eigen::MatrixXd points(count, dim);
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < dim; ++d) {
      // radical inverse of index i+1 in base bases[d]
      const int b = bases[d];
      double f = 1.0, r = 0.0;
      for (int k = i + 1; k > 0; k /= b) {
        f /= b;
        r += f * (k % b);
      }
      points(i, d) = (2.0 * r - 1.0) * half_width;
    }
  }
  return points;
}

}  // namespace cldmd
