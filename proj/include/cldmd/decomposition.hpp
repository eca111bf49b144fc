#ifndef CLDMD_DECOMPOSITION_HPP
#define CLDMD_DECOMPOSITION_HPP

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "cldmd/dataset.hpp"
#include "cldmd/gramian.hpp"
#include "cldmd/kernels.hpp"
#include "cldmd/numerics.hpp"

namespace cldmd {

/// Scalar kernel plus the operator-valued coupling used on the augmented
/// control channels. An empty coupling means the diagonal operator
/// K(x,y) = k(x,y) * I.
struct KernelConfig {
  double width = 1.0;
  Eigen::MatrixXd coupling;  // empty => diagonal

  GaussianKernel scalar() const { return GaussianKernel(width); }
  KernelOperator make_operator(int control_dim) const;
};

/// Everything needed to evaluate eigenfunctions, modes and predictions at
/// new points. Self-contained: for the data-centric basis the referenced
/// trajectories are stored inline.
struct Decomposition {
  Eigen::VectorXcd eigenvalues;       // per second
  Eigen::MatrixXcd coefficients;      // Ntilde x Ntilde, column j normalized
  Eigen::MatrixXcd modes;             // n x Ntilde
  KernelConfig kernel;
  double eps_control = 0.0;
  double eps_basis = 0.0;

  BasisSpec::Kind basis_kind = BasisSpec::Kind::kernel_centers;
  Eigen::MatrixXd centers;                      // kernel basis
  std::vector<SampledTrajectory> basis_paths;   // data-centric basis

  int state_dim = 0;

  struct Diagnostics {
    double gram_control_condition = 0.0;
    double gram_basis_condition = 0.0;
    double identity_residual_mean = 0.0;
  } diagnostics;

  Eigen::Index size() const { return eigenvalues.size(); }
};

struct Prediction {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // one row per time
  double imag_residual = 0.0;
};

/// Per-dimension relative RMS error. When the truth RMS in a dimension falls
/// below 1e-12 the entry holds the absolute RMS and the flag is set.
struct RmsReport {
  Eigen::VectorXd values;
  std::vector<bool> absolute;
};

/// Runs the full pipeline: assembles the Gram and interaction matrices,
/// forms the finite-rank operator, decomposes it, normalizes the
/// eigenfunction coefficients and computes the modes. When matrices_out is
/// given the assembled matrices are copied there.
Decomposition decompose(const Dataset& ds, const BasisSpec& basis,
                        const KernelConfig& kernel, const FeedbackLaw& law,
                        double eps_control, double eps_basis,
                        OperatorMatrices* matrices_out = nullptr);

/// Inner products of each identity component with the basis elements
/// (n x Ntilde): center coordinates for the kernel basis, Simpson integrals
/// of the trajectory states for the data-centric basis.
Eigen::MatrixXd identity_inner_products(const Decomposition& dec);

/// Scales each column v to v / sqrt(v^dagger G v); the Gram-weighted norm of
/// every returned column is one.
Eigen::MatrixXcd normalize_gram_columns(const Eigen::MatrixXcd& columns,
                                        const Eigen::MatrixXd& gram_reg);

/// Modes from normalized coefficients: xi = C (V^T Greg)^-1 with plain
/// transpose; C holds the identity inner products.
Eigen::MatrixXcd modes_from(const Eigen::MatrixXcd& coefficients,
                            const Eigen::MatrixXd& gram_basis_reg,
                            const Eigen::MatrixXd& identity_columns);

/// Values of the occupation-kernel or kernel basis elements at x.
Eigen::VectorXd basis_values_at(const Decomposition& dec,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

/// Eigenfunction values (phi_1(x), ..., phi_Ntilde(x)).
Eigen::VectorXcd eigenfunctions_at(const Decomposition& dec,
                                   const Eigen::Ref<const Eigen::VectorXd>& x);

/// Direct spectral prediction x(t) = Re sum_j xi_j phi_j(x0) exp(lambda_j t).
/// top_modes > 0 keeps only that many eigenpairs, ranked by the contribution
/// magnitude |xi_j phi_j(x0)|; 0 sums all of them.
Prediction predict_direct(const Decomposition& dec,
                          const Eigen::Ref<const Eigen::VectorXd>& x0,
                          const Eigen::Ref<const Eigen::VectorXd>& times,
                          int top_modes = 0);

/// Reconstructed closed-loop vector field Re sum_j lambda_j xi_j phi_j(x).
/// The imaginary magnitude is reported through imag_inf_out when given.
Eigen::VectorXd reconstruct_field(const Decomposition& dec,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  double* imag_inf_out = nullptr);

/// Fixed-step RK4 flow of the reconstructed field, sampled at every step.
/// On divergence the samples computed so far are stored into partial_out
/// (when given) before the divergence_error is thrown.
Prediction predict_indirect(const Decomposition& dec,
                            const Eigen::Ref<const Eigen::VectorXd>& x0,
                            double t_end, double step,
                            Prediction* partial_out = nullptr);

RmsReport relative_rms(const Prediction& pred, const Prediction& truth);

void save_decomposition(const Decomposition& dec,
                        const std::filesystem::path& path);
Decomposition load_decomposition(const std::filesystem::path& path);

}  // namespace cldmd

#endif
