#ifndef CLDMD_GRAMIAN_HPP
#define CLDMD_GRAMIAN_HPP

#include <Eigen/Dense>
#include <vector>

#include "cldmd/dataset.hpp"
#include "cldmd/kernels.hpp"
#include "cldmd/numerics.hpp"

namespace cldmd {

/// Number of worker threads used by the matrix assembly routines (1 = run on
/// the caller). Entry results do not depend on the thread count.
void set_num_threads(int n);
int num_threads();

/// The four matrices of the finite-rank representation plus their
/// regularization coefficients. `gram_control` is the Gram matrix of the
/// control occupation kernels (M x M); `gram_basis` is the Gram matrix of
/// the chosen scalar basis (Ntilde x Ntilde); `interaction_feedback` holds
/// the multiplication-operator inner products and `interaction_liouville`
/// the Liouville-adjoint inner products (both Ntilde x M).
struct OperatorMatrices {
  Eigen::MatrixXd gram_control;
  Eigen::MatrixXd gram_basis;
  Eigen::MatrixXd interaction_feedback;
  Eigen::MatrixXd interaction_liouville;
  double eps_control = 0.0;
  double eps_basis = 0.0;

  void validate() const;
};

/// Gram matrix of the control occupation kernels:
/// entry (i, j) = integral over [0,Ti]x[0,Tj] of
/// (1 u_i(tau)^T) K(gamma_j(t), gamma_i(tau)) (1; u_j(t)) dtau dt.
Eigen::MatrixXd gram_control_occupation(const Dataset& ds,
                                        const KernelOperator& kop);

/// Gram matrix of kernel functions at the given centers.
Eigen::MatrixXd gram_alpha_kernel(const Eigen::Ref<const Eigen::MatrixXd>& centers,
                                  const GaussianKernel& k);

/// Gram matrix of scalar occupation kernels for the indexed trajectories.
Eigen::MatrixXd gram_alpha_occupation(const Dataset& ds,
                                      const std::vector<int>& indices,
                                      const GaussianKernel& k);

/// Liouville-adjoint interaction against kernel centers: pure endpoint
/// differences K(c_i, gamma_k(Tk)) - K(c_i, gamma_k(0)).
Eigen::MatrixXd interaction_liouville_kernel(
    const Eigen::Ref<const Eigen::MatrixXd>& centers, const Dataset& ds,
    const GaussianKernel& k);

/// Liouville-adjoint interaction against occupation kernels: single time
/// integral of the endpoint kernel difference along each basis trajectory.
Eigen::MatrixXd interaction_liouville_occupation(const Dataset& ds,
                                                 const std::vector<int>& indices,
                                                 const GaussianKernel& k);

/// Multiplication-operator interaction for the kernel basis:
/// entry (j, k) = integral of (1 mu(c_j)^T) K(gamma_k(t), c_j) (1; u_k(t)) dt.
Eigen::MatrixXd interaction_feedback_kernel(
    const Eigen::Ref<const Eigen::MatrixXd>& centers, const Dataset& ds,
    const KernelOperator& kop, const FeedbackLaw& law);

/// Multiplication-operator interaction for the data-centric basis:
/// entry (i, k) = double integral of
/// (1 mu(gamma_i(tau))^T) K(gamma_k(t), gamma_i(tau)) (1; u_k(t)) dtau dt.
Eigen::MatrixXd interaction_feedback_occupation(const Dataset& ds,
                                                const std::vector<int>& indices,
                                                const KernelOperator& kop,
                                                const FeedbackLaw& law);

/// Finite-rank representation of the composed multiplication / Liouville
/// operator: (Gb + eps_b I)^-1 * If * (Gc + eps_c I)^-1 * Il^T, realized as
/// two regularized solves.
Eigen::MatrixXd finite_rank_matrix(const OperatorMatrices& m);

/// Simpson coefficients (weights times step) for one trajectory's grid.
Eigen::VectorXd trajectory_quad_coefficients(const SampledTrajectory& tr);

}  // namespace cldmd

#endif
