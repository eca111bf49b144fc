#ifndef CLDMD_NUMERICS_HPP
#define CLDMD_NUMERICS_HPP

#include <Eigen/Dense>
#include <complex>

namespace cldmd {

/// Quadrature weights for a uniform grid. The weights are unitless
/// multipliers of the step, so sum(weights) * step equals the length of the
/// integration interval.
struct QuadratureWeights {
  Eigen::VectorXd weights;
  double step = 0.0;

  /// Effective per-sample coefficients weights[k] * step.
  Eigen::VectorXd coefficients() const { return weights * step; }
};

/// Composite Simpson weights on n_samples uniform points with spacing h.
/// Odd sample counts use the 1/3 rule throughout; even counts >= 4 close the
/// grid with the 3/8 rule on the final three intervals so fourth-order
/// accuracy is kept. n_samples == 2 falls back to the trapezoid rule.
QuadratureWeights simpson_weights(int n_samples, double h);

double quad_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
               const QuadratureWeights& w);
std::complex<double> quad_1d(const Eigen::Ref<const Eigen::VectorXcd>& samples,
                             const QuadratureWeights& w);

/// Tensor-product rule: sum_{k,l} w_t[k] w_tau[l] h_t h_tau samples(k,l).
/// Rows of samples follow w_t, columns follow w_tau.
double quad_2d(const Eigen::Ref<const Eigen::MatrixXd>& samples,
               const QuadratureWeights& w_t, const QuadratureWeights& w_tau);

/// Eigendecomposition result with a deterministic order and phase.
///
/// Eigenvalues are sorted by descending real part; ties are broken by
/// ascending imaginary magnitude, with the +Im member of a conjugate pair
/// first, then by ascending index of the eigenvector's largest-magnitude
/// component. Each eigenvector has unit 2-norm and is rotated so its
/// largest-magnitude entry is real and positive.
struct EigenPairs {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // column j pairs with values[j]
};

EigenPairs eig_general(const Eigen::MatrixXd& a);

/// Solves (G + eps*I) X = B through a Cholesky factorization with iterative
/// refinement. G must be symmetric.
Eigen::MatrixXd solve_regularized(const Eigen::MatrixXd& g,
                                  const Eigen::MatrixXd& b, double eps);

/// Solves M X = B for a general complex square M (partial-pivot LU with
/// refinement). Throws singular_matrix_error when the condition estimate
/// exceeds 1e14.
Eigen::MatrixXcd solve_complex(const Eigen::MatrixXcd& m,
                               const Eigen::MatrixXcd& b);

}  // namespace cldmd

#endif
