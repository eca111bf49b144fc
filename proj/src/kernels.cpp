#include "cldmd/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cldmd {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* who) {
  if (a != b) {
    std::ostringstream os;
    os << who << ": dimension mismatch (" << a << " vs " << b << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

GaussianKernel::GaussianKernel(double width) : width_(width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("GaussianKernel: width must be positive");
  }
}

double GaussianKernel::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y) const {
  require_same_dim(x.size(), y.size(), "GaussianKernel::eval");
  return std::exp(-(x - y).squaredNorm() / width_);
}

Eigen::MatrixXd GaussianKernel::cross(
    const Eigen::Ref<const Eigen::MatrixXd>& rows_a,
    const Eigen::Ref<const Eigen::MatrixXd>& rows_b) const {
  require_same_dim(rows_a.cols(), rows_b.cols(), "GaussianKernel::cross");
  const Eigen::VectorXd a2 = rows_a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = rows_b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = a2.replicate(1, rows_b.rows()) +
                       b2.transpose().replicate(rows_a.rows(), 1) -
                       2.0 * (rows_a * rows_b.transpose());
  // Rounding can push tiny distances slightly negative; the kernel must stay
  // in (0, 1].
  d2 = d2.cwiseMax(0.0);
  return (-d2 / width_).array().exp();
}

double eval_scalar(const GaussianKernel& k,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  return k.eval(x, y);
}

KernelOperator::KernelOperator(GaussianKernel scalar, int channels)
    : scalar_(scalar), channels_(channels), diagonal_(true) {
  if (channels < 1) {
    throw std::invalid_argument("KernelOperator: need at least one channel");
  }
}

KernelOperator::KernelOperator(GaussianKernel scalar, Eigen::MatrixXd coupling)
    : scalar_(scalar),
      channels_(static_cast<int>(coupling.rows())),
      diagonal_(false),
      coupling_(std::move(coupling)) {
  if (coupling_.rows() != coupling_.cols() || coupling_.rows() < 1) {
    throw std::invalid_argument("KernelOperator: coupling must be square");
  }
  if ((coupling_ - coupling_.transpose()).norm() >
      1e-12 * std::max(coupling_.norm(), 1.0)) {
    throw std::invalid_argument("KernelOperator: coupling must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(coupling_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "KernelOperator: coupling must be positive definite");
  }
  if (coupling_.isIdentity(0.0)) diagonal_ = true;
}

Eigen::MatrixXd KernelOperator::eval_operator(
    const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const double s = scalar_.eval(x, y);
  if (diagonal_ && coupling_.size() == 0) {
    return s * Eigen::MatrixXd::Identity(channels_, channels_);
  }
  return s * coupling_;
}

double KernelOperator::channel_form(
    const Eigen::Ref<const Eigen::VectorXd>& a,
    const Eigen::Ref<const Eigen::VectorXd>& b) const {
  require_same_dim(a.size(), b.size(), "KernelOperator::channel_form");
  require_same_dim(a.size() + 1, channels_, "KernelOperator::channel_form");
  if (diagonal_) {
    return 1.0 + a.dot(b);
  }
  Eigen::VectorXd va(channels_), vb(channels_);
  va << 1.0, a;
  vb << 1.0, b;
  return va.dot(coupling_ * vb);
}

double augmented_pair_integrand(const KernelOperator& kop,
                                const Eigen::Ref<const Eigen::VectorXd>& x_i,
                                const Eigen::Ref<const Eigen::VectorXd>& u_i,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j,
                                const Eigen::Ref<const Eigen::VectorXd>& u_j) {
  return kop.scalar().eval(x_j, x_i) * kop.channel_form(u_i, u_j);
}

double feedback_pair_integrand(const KernelOperator& kop,
                               const Eigen::Ref<const Eigen::VectorXd>& x_i,
                               const Eigen::Ref<const Eigen::VectorXd>& mu_at_x_i,
                               const Eigen::Ref<const Eigen::VectorXd>& x_j,
                               const Eigen::Ref<const Eigen::VectorXd>& u_j) {
  return kop.scalar().eval(x_j, x_i) * kop.channel_form(mu_at_x_i, u_j);
}

}  // namespace cldmd
