#ifndef CLDMD_KERNELS_HPP
#define CLDMD_KERNELS_HPP

#include <Eigen/Dense>

namespace cldmd {

/// Gaussian radial basis kernel exp(-|x - y|^2 / width). The width parameter
/// is the divisor inside the exponent (squared-length units of state space),
/// not a bandwidth sigma.
class GaussianKernel {
public:
  explicit GaussianKernel(double width);

  double width() const { return width_; }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// Pairwise kernel matrix: out(i, j) = eval(rows_a.row(i), rows_b.row(j)).
  Eigen::MatrixXd cross(const Eigen::Ref<const Eigen::MatrixXd>& rows_a,
                        const Eigen::Ref<const Eigen::MatrixXd>& rows_b) const;

private:
  double width_;
};

double eval_scalar(const GaussianKernel& k,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Operator-valued kernel K(x, y) = A * k(x, y) acting on the augmented
/// control space R^{m+1}. A defaults to the identity, which is the diagonal
/// operator used throughout and enables a scalar fast path.
class KernelOperator {
public:
  KernelOperator(GaussianKernel scalar, int channels);
  KernelOperator(GaussianKernel scalar, Eigen::MatrixXd coupling);

  const GaussianKernel& scalar() const { return scalar_; }
  int channels() const { return channels_; }
  bool diagonal() const { return diagonal_; }
  const Eigen::MatrixXd& coupling() const { return coupling_; }

  /// K(x, y) as an explicit (m+1)x(m+1) matrix.
  Eigen::MatrixXd eval_operator(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// (1 a^T) A (1; b) without evaluating the scalar kernel.
  double channel_form(const Eigen::Ref<const Eigen::VectorXd>& a,
                      const Eigen::Ref<const Eigen::VectorXd>& b) const;

private:
  GaussianKernel scalar_;
  int channels_;
  bool diagonal_;
  Eigen::MatrixXd coupling_;
};

/// Integrand of the control-occupation Gram entries:
/// (1 u_i^T) K(x_j, x_i) (1; u_j).
double augmented_pair_integrand(const KernelOperator& kop,
                                const Eigen::Ref<const Eigen::VectorXd>& x_i,
                                const Eigen::Ref<const Eigen::VectorXd>& u_i,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j,
                                const Eigen::Ref<const Eigen::VectorXd>& u_j);

/// Integrand of the feedback interaction entries:
/// (1 mu(x_i)^T) K(x_j, x_i) (1; u_j).
double feedback_pair_integrand(const KernelOperator& kop,
                               const Eigen::Ref<const Eigen::VectorXd>& x_i,
                               const Eigen::Ref<const Eigen::VectorXd>& mu_at_x_i,
                               const Eigen::Ref<const Eigen::VectorXd>& x_j,
                               const Eigen::Ref<const Eigen::VectorXd>& u_j);

}  // namespace cldmd

#endif
