#include "cldmd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cldmd/errors.hpp"

namespace cldmd {

QuadratureWeights simpson_weights(int n_samples, double h) {
  if (n_samples < 2) {
    throw std::invalid_argument("simpson_weights: need at least 2 samples");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("simpson_weights: step must be positive");
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_samples);
  if (n_samples == 2) {
    w << 0.5, 0.5;  // single interval, trapezoid
    return {w, h};
  }

  const int intervals = n_samples - 1;
  // Number of intervals handled by the 1/3 rule; the remainder (0 or 3) is
  // closed by the 3/8 rule.
  const int third_intervals = (intervals % 2 == 0) ? intervals : intervals - 3;

  if (third_intervals > 0) {
    w[0] += 1.0 / 3.0;
    for (int k = 1; k < third_intervals; ++k) {
      w[k] += (k % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
    }
    w[third_intervals] += 1.0 / 3.0;
  }
  if (third_intervals < intervals) {
    const int s = third_intervals;  // 3/8 rule on points s .. s+3
    w[s] += 3.0 / 8.0;
    w[s + 1] += 9.0 / 8.0;
    w[s + 2] += 9.0 / 8.0;
    w[s + 3] += 3.0 / 8.0;
  }
  return {w, h};
}

namespace {

template <typename Scalar>
Scalar quad_1d_impl(const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& samples,
                    const QuadratureWeights& w) {
  if (samples.size() != w.weights.size()) {
    std::ostringstream os;
    os << "quad_1d: sample count " << samples.size()
       << " does not match weight count " << w.weights.size();
    throw std::invalid_argument(os.str());
  }
  Scalar acc{};
  for (Eigen::Index k = 0; k < samples.size(); ++k) {
    acc += w.weights[k] * w.step * samples[k];
  }
  return acc;
}

}  // namespace

double quad_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
               const QuadratureWeights& w) {
  return quad_1d_impl<double>(samples, w);
}

std::complex<double> quad_1d(const Eigen::Ref<const Eigen::VectorXcd>& samples,
                             const QuadratureWeights& w) {
  return quad_1d_impl<std::complex<double>>(samples, w);
}

double quad_2d(const Eigen::Ref<const Eigen::MatrixXd>& samples,
               const QuadratureWeights& w_t, const QuadratureWeights& w_tau) {
  if (samples.rows() != w_t.weights.size() ||
      samples.cols() != w_tau.weights.size()) {
    std::ostringstream os;
    os << "quad_2d: samples are " << samples.rows() << "x" << samples.cols()
       << " but weights have lengths " << w_t.weights.size() << " and "
       << w_tau.weights.size();
    throw std::invalid_argument(os.str());
  }
  return w_t.coefficients().dot(samples * w_tau.coefficients());
}

namespace {

// Rotates each column so its largest-magnitude entry is real and positive,
// after normalizing to unit 2-norm.
void fix_column_phase(Eigen::MatrixXcd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double nrm = vectors.col(j).norm();
    if (nrm > 0.0) vectors.col(j) /= nrm;
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double mag = std::abs(vectors(i, j));
      if (mag > best) {
        best = mag;
        imax = i;
      }
    }
    const std::complex<double> z = vectors(imax, j);
    if (best > 0.0) vectors.col(j) *= std::conj(z) / best;
  }
}

Eigen::Index largest_component_index(const Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > best) {
      best = mag;
      imax = i;
    }
  }
  return imax;
}

}  // namespace

EigenPairs eig_general(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eig_general: matrix must be square");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("eig_general: matrix has non-finite entries");
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_general: eigensolver failed to converge on a " << a.rows()
       << "x" << a.cols() << " matrix (|A|_F = " << a.norm() << ")";
    throw numeric_error(os.str());
  }

  Eigen::MatrixXcd vectors = solver.eigenvectors();
  Eigen::VectorXcd values = solver.eigenvalues();
  fix_column_phase(vectors);

  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<Eigen::Index> maxidx(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    maxidx[static_cast<std::size_t>(j)] = largest_component_index(vectors.col(j));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index lhs, Eigen::Index rhs) {
                     const auto& a_ = values[lhs];
                     const auto& b_ = values[rhs];
                     if (a_.real() != b_.real()) return a_.real() > b_.real();
                     const double ia = std::abs(a_.imag());
                     const double ib = std::abs(b_.imag());
                     if (ia != ib) return ia < ib;
                     if (a_.imag() != b_.imag()) return a_.imag() > b_.imag();
                     return maxidx[static_cast<std::size_t>(lhs)] <
                            maxidx[static_cast<std::size_t>(rhs)];
                   });

  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values[j] = values[order[static_cast<std::size_t>(j)]];
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }

  // Residual contract: |A v - lambda v| <= 1e-8 |A|_F for every pair.
  const double scale = a.norm();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double res =
        (a * out.vectors.col(j) - out.values[j] * out.vectors.col(j)).norm();
    if (res > 1e-8 * std::max(scale, 1e-300)) {
      std::ostringstream os;
      os << "eig_general: eigenpair " << j << " residual " << res
         << " exceeds 1e-8 * |A|_F = " << 1e-8 * scale;
      throw numeric_error(os.str());
    }
  }
  return out;
}

namespace {

void require_square(const Eigen::Index rows, const Eigen::Index cols,
                    const char* who) {
  if (rows != cols) {
    std::ostringstream os;
    os << who << ": matrix must be square, got " << rows << "x" << cols;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Eigen::MatrixXd solve_regularized(const Eigen::MatrixXd& g,
                                  const Eigen::MatrixXd& b, double eps) {
  require_square(g.rows(), g.cols(), "solve_regularized");
  if (g.rows() != b.rows()) {
    throw std::invalid_argument("solve_regularized: rhs row count mismatch");
  }
  if (eps < 0.0) {
    throw std::invalid_argument("solve_regularized: eps must be nonnegative");
  }
  const double gnorm = g.norm();
  if ((g - g.transpose()).norm() > 1e-10 * gnorm) {
    throw std::invalid_argument("solve_regularized: matrix is not symmetric");
  }

  Eigen::MatrixXd greg = g;
  greg.diagonal().array() += eps;
  Eigen::LLT<Eigen::MatrixXd> llt(greg);
  if (llt.info() != Eigen::Success) {
    throw singular_matrix_error(
        "solve_regularized: G + eps*I is not positive definite; "
        "increase the regularization coefficient eps");
  }

  Eigen::MatrixXd x = llt.solve(b);
  const double bnorm = b.norm();
  for (int iter = 0; iter < 4; ++iter) {
    Eigen::MatrixXd r = b - greg * x;
    if (r.norm() <= 1e-12 * bnorm) break;
    x += llt.solve(r);
  }
  return x;
}

Eigen::MatrixXcd solve_complex(const Eigen::MatrixXcd& m,
                               const Eigen::MatrixXcd& b) {
  require_square(m.rows(), m.cols(), "solve_complex");
  if (m.rows() != b.rows()) {
    throw std::invalid_argument("solve_complex: rhs row count mismatch");
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "solve_complex: matrix numerically singular "
       << "(condition estimate " << (rcond > 0 ? 1.0 / rcond : INFINITY)
       << ")";
    throw singular_matrix_error(os.str());
  }

  Eigen::MatrixXcd x = lu.solve(b);
  const double bnorm = b.norm();
  for (int iter = 0; iter < 4; ++iter) {
    Eigen::MatrixXcd r = b - m * x;
    if (r.norm() <= 1e-12 * bnorm) break;
    x += lu.solve(r);
  }
  return x;
}

}  // namespace cldmd
