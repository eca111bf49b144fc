#include "cldmd/gramian.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "cldmd/errors.hpp"

namespace cldmd {

namespace {

std::atomic<int> g_threads{1};

// Runs fn(i) for i in [0, count), splitting across the configured thread
// count. Each index is processed exactly once; fn must write to disjoint
// outputs.
template <typename Fn>
void parallel_for(Eigen::Index count, const Fn& fn) {
  const int threads = std::min<Eigen::Index>(g_threads.load(), count);
  if (threads <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr err;
  std::mutex err_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      try {
        for (Eigen::Index i = next.fetch_add(1); i < count;
             i = next.fetch_add(1)) {
          fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Augmented control samples [1 | U] scaled row-wise by the quadrature
// coefficients; one column per channel of the operator-valued kernel.
Eigen::MatrixXd weighted_augmented_controls(const SampledTrajectory& tr,
                                            const Eigen::VectorXd& coef) {
  const Eigen::Index n = tr.n_samples();
  Eigen::MatrixXd aug(n, tr.control_dim() + 1);
  aug.col(0) = coef;
  for (Eigen::Index c = 0; c < tr.control_dim(); ++c) {
    aug.col(c + 1) = coef.cwiseProduct(tr.controls.col(c));
  }
  return aug;
}

// Row-wise feedback evaluations nu(gamma(t)) = (1, mu(gamma(t))^T) scaled by
// the quadrature coefficients.
Eigen::MatrixXd weighted_feedback_channels(const SampledTrajectory& tr,
                                           const FeedbackLaw& law,
                                           const Eigen::VectorXd& coef) {
  const Eigen::Index n = tr.n_samples();
  Eigen::MatrixXd nu(n, law.control_dim() + 1);
  nu.col(0) = coef;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd mu = law.evaluate(tr.states.row(k).transpose());
    nu.block(k, 1, 1, mu.size()) = coef[k] * mu.transpose();
  }
  return nu;
}

// sum_{c,d} A(c,d) * left[:,c]^T * kblock^T * right[:,d] for the channel
// coupling A (identity when the operator is diagonal). kblock(k, l) pairs
// row k of the "left" trajectory with row l of the "right" one.
double channel_contraction(const KernelOperator& kop,
                           const Eigen::MatrixXd& kblock,
                           const Eigen::MatrixXd& left,
                           const Eigen::MatrixXd& right) {
  if (kop.diagonal()) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < left.cols(); ++c) {
      acc += left.col(c).dot(kblock * right.col(c));
    }
    return acc;
  }
  const Eigen::MatrixXd& a = kop.coupling();
  double acc = 0.0;
  for (Eigen::Index c = 0; c < left.cols(); ++c) {
    const Eigen::VectorXd kb_left = kblock.transpose() * left.col(c);
    for (Eigen::Index d = 0; d < right.cols(); ++d) {
      acc += a(c, d) * kb_left.dot(right.col(d));
    }
  }
  return acc;
}

void check_dataset_operator(const Dataset& ds, const KernelOperator& kop) {
  if (kop.channels() != ds.control_dim + 1) {
    std::ostringstream os;
    os << "gramian: kernel operator has " << kop.channels()
       << " channels but dataset needs " << ds.control_dim + 1;
    throw std::invalid_argument(os.str());
  }
}

void check_feedback_dims(const Dataset& ds, const FeedbackLaw& law) {
  if (law.control_dim() != ds.control_dim) {
    std::ostringstream os;
    os << "gramian: feedback law has " << law.control_dim()
       << " outputs but dataset controls are " << ds.control_dim
       << "-dimensional";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void set_num_threads(int n) {
  g_threads.store(n < 1 ? 1 : n);
}

int num_threads() { return g_threads.load(); }

Eigen::VectorXd trajectory_quad_coefficients(const SampledTrajectory& tr) {
  return simpson_weights(static_cast<int>(tr.n_samples()), tr.dt)
      .coefficients();
}

void OperatorMatrices::validate() const {
  const Eigen::Index m = gram_control.rows();
  const Eigen::Index nt = gram_basis.rows();
  if (gram_control.cols() != m || gram_basis.cols() != nt) {
    throw std::invalid_argument("OperatorMatrices: Gram matrices not square");
  }
  if (interaction_feedback.rows() != nt || interaction_feedback.cols() != m ||
      interaction_liouville.rows() != nt || interaction_liouville.cols() != m) {
    throw std::invalid_argument(
        "OperatorMatrices: interaction matrices must be Ntilde x M");
  }
  if (eps_control < 0.0 || eps_basis < 0.0) {
    throw std::invalid_argument(
        "OperatorMatrices: regularization must be nonnegative");
  }
  const double tol_c = 1e-9 * std::max(gram_control.norm(), 1e-300);
  if ((gram_control - gram_control.transpose()).norm() > tol_c) {
    throw numeric_error("OperatorMatrices: control Gram not symmetric");
  }
  const double tol_b = 1e-9 * std::max(gram_basis.norm(), 1e-300);
  if ((gram_basis - gram_basis.transpose()).norm() > tol_b) {
    throw numeric_error("OperatorMatrices: basis Gram not symmetric");
  }
}

Eigen::MatrixXd gram_control_occupation(const Dataset& ds,
                                        const KernelOperator& kop) {
  ds.validate();
  check_dataset_operator(ds, kop);
  const auto m = static_cast<Eigen::Index>(ds.size());
  const GaussianKernel& kernel = kop.scalar();

  std::vector<Eigen::VectorXd> coefs(ds.size());
  std::vector<Eigen::MatrixXd> aug(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    coefs[i] = trajectory_quad_coefficients(ds.trajectories[i]);
    aug[i] = weighted_augmented_controls(ds.trajectories[i], coefs[i]);
  }

  Eigen::MatrixXd g(m, m);
  parallel_for(m, [&](Eigen::Index i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const Eigen::MatrixXd kblock =
          kernel.cross(ds.trajectories[static_cast<std::size_t>(i)].states,
                       ds.trajectories[static_cast<std::size_t>(j)].states);
      const double v = channel_contraction(
          kop, kblock, aug[static_cast<std::size_t>(i)],
          aug[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  });
  return g;
}

Eigen::MatrixXd gram_alpha_kernel(const Eigen::Ref<const Eigen::MatrixXd>& centers,
                                  const GaussianKernel& k) {
  Eigen::MatrixXd g = k.cross(centers, centers);
  // enforce exact symmetry of the analytic Gram
  g = 0.5 * (g + g.transpose()).eval();
  return g;
}

Eigen::MatrixXd gram_alpha_occupation(const Dataset& ds,
                                      const std::vector<int>& indices,
                                      const GaussianKernel& k) {
  ds.validate();
  const auto nt = static_cast<Eigen::Index>(indices.size());
  std::vector<Eigen::VectorXd> coefs(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    coefs[i] = trajectory_quad_coefficients(
        ds.trajectories[static_cast<std::size_t>(indices[i])]);
  }
  Eigen::MatrixXd g(nt, nt);
  parallel_for(nt, [&](Eigen::Index i) {
    const auto& tri = ds.trajectories[static_cast<std::size_t>(
        indices[static_cast<std::size_t>(i)])];
    for (Eigen::Index j = i; j < nt; ++j) {
      const auto& trj = ds.trajectories[static_cast<std::size_t>(
          indices[static_cast<std::size_t>(j)])];
      const Eigen::MatrixXd kblock = k.cross(tri.states, trj.states);
      const double v = coefs[static_cast<std::size_t>(i)].dot(
          kblock * coefs[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  });
  return g;
}

Eigen::MatrixXd interaction_liouville_kernel(
    const Eigen::Ref<const Eigen::MatrixXd>& centers, const Dataset& ds,
    const GaussianKernel& k) {
  ds.validate();
  const auto m = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd ends(m, centers.cols()), starts(m, centers.cols());
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& tr = ds.trajectories[static_cast<std::size_t>(j)];
    ends.row(j) = tr.states.row(tr.n_samples() - 1);
    starts.row(j) = tr.states.row(0);
  }
  return k.cross(centers, ends) - k.cross(centers, starts);
}

Eigen::MatrixXd interaction_liouville_occupation(const Dataset& ds,
                                                 const std::vector<int>& indices,
                                                 const GaussianKernel& k) {
  ds.validate();
  const auto nt = static_cast<Eigen::Index>(indices.size());
  const auto m = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd ends(m, ds.state_dim), starts(m, ds.state_dim);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& tr = ds.trajectories[static_cast<std::size_t>(j)];
    ends.row(j) = tr.states.row(tr.n_samples() - 1);
    starts.row(j) = tr.states.row(0);
  }
  Eigen::MatrixXd out(nt, m);
  parallel_for(nt, [&](Eigen::Index i) {
    const auto& tri = ds.trajectories[static_cast<std::size_t>(
        indices[static_cast<std::size_t>(i)])];
    const Eigen::VectorXd coef = trajectory_quad_coefficients(tri);
    const Eigen::MatrixXd diff =
        k.cross(tri.states, ends) - k.cross(tri.states, starts);
    out.row(i) = coef.transpose() * diff;
  });
  return out;
}

Eigen::MatrixXd interaction_feedback_kernel(
    const Eigen::Ref<const Eigen::MatrixXd>& centers, const Dataset& ds,
    const KernelOperator& kop, const FeedbackLaw& law) {
  ds.validate();
  check_dataset_operator(ds, kop);
  check_feedback_dims(ds, law);
  const auto nt = centers.rows();
  const auto m = static_cast<Eigen::Index>(ds.size());
  const GaussianKernel& kernel = kop.scalar();

  std::vector<Eigen::VectorXd> coefs(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    coefs[k] = trajectory_quad_coefficients(ds.trajectories[k]);
  }

  Eigen::MatrixXd out(nt, m);
  parallel_for(nt, [&](Eigen::Index j) {
    const Eigen::VectorXd mu = law.evaluate(centers.row(j).transpose());
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto& tr = ds.trajectories[static_cast<std::size_t>(k)];
      const Eigen::VectorXd& coef = coefs[static_cast<std::size_t>(k)];
      const Eigen::VectorXd kvec =
          kernel.cross(tr.states, centers.row(j)).col(0);
      double acc = 0.0;
      if (kop.diagonal()) {
        acc = coef.dot(kvec) + (coef.cwiseProduct(kvec))
                                   .dot((tr.controls * mu).eval());
      } else {
        for (Eigen::Index l = 0; l < tr.n_samples(); ++l) {
          acc += coef[l] * kvec[l] *
                 kop.channel_form(mu, tr.controls.row(l).transpose());
        }
      }
      out(j, k) = acc;
    }
  });
  return out;
}

Eigen::MatrixXd interaction_feedback_occupation(const Dataset& ds,
                                                const std::vector<int>& indices,
                                                const KernelOperator& kop,
                                                const FeedbackLaw& law) {
  ds.validate();
  check_dataset_operator(ds, kop);
  check_feedback_dims(ds, law);
  const auto nt = static_cast<Eigen::Index>(indices.size());
  const auto m = static_cast<Eigen::Index>(ds.size());
  const GaussianKernel& kernel = kop.scalar();

  std::vector<Eigen::VectorXd> coefs(ds.size());
  std::vector<Eigen::MatrixXd> aug(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    coefs[k] = trajectory_quad_coefficients(ds.trajectories[k]);
    aug[k] = weighted_augmented_controls(ds.trajectories[k], coefs[k]);
  }

  Eigen::MatrixXd out(nt, m);
  parallel_for(nt, [&](Eigen::Index i) {
    const auto& tri = ds.trajectories[static_cast<std::size_t>(
        indices[static_cast<std::size_t>(i)])];
    const Eigen::VectorXd coef_i = trajectory_quad_coefficients(tri);
    const Eigen::MatrixXd nu = weighted_feedback_channels(tri, law, coef_i);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::MatrixXd kblock =
          kernel.cross(tri.states,
                       ds.trajectories[static_cast<std::size_t>(k)].states);
      out(i, k) = channel_contraction(kop, kblock, nu,
                                      aug[static_cast<std::size_t>(k)]);
    }
  });
  return out;
}

Eigen::MatrixXd finite_rank_matrix(const OperatorMatrices& m) {
  m.validate();
  const Eigen::MatrixXd inner = solve_regularized(
      m.gram_control, m.interaction_liouville.transpose(), m.eps_control);
  const Eigen::MatrixXd scaled = m.interaction_feedback * inner;
  Eigen::MatrixXd out = solve_regularized(m.gram_basis, scaled, m.eps_basis);
  if (!out.allFinite()) {
    throw numeric_error("finite_rank_matrix: non-finite result");
  }
  return out;
}

}  // namespace cldmd
