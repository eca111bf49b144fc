#ifndef CLDMD_DATASET_HPP
#define CLDMD_DATASET_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cldmd {

/// One uniformly sampled open-loop trajectory together with the control
/// signal that produced it, both sampled on the same time grid.
struct SampledTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd states;    // N x n, row k = state at t0 + k*dt
  Eigen::MatrixXd controls;  // N x m

  Eigen::Index n_samples() const { return states.rows(); }
  Eigen::Index state_dim() const { return states.cols(); }
  Eigen::Index control_dim() const { return controls.cols(); }
  double duration() const { return static_cast<double>(n_samples() - 1) * dt; }

  /// Throws schema_error when the sampling or shape invariants fail;
  /// `label` names the trajectory in the message.
  void validate(const std::string& label) const;
};

struct Dataset {
  std::vector<SampledTrajectory> trajectories;
  int state_dim = 0;
  int control_dim = 0;

  std::size_t size() const { return trajectories.size(); }
  void validate() const;
};

/// Feedback law u = mu(x). Either a linear gain matrix or an arbitrary
/// callback supplied by embedding code.
class FeedbackLaw {
public:
  static FeedbackLaw linear(Eigen::MatrixXd gain);
  static FeedbackLaw tabulated(
      std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
      int control_dim);
  static FeedbackLaw zero(int control_dim, int state_dim);

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  int control_dim() const { return control_dim_; }
  bool is_linear() const { return is_linear_; }
  const Eigen::MatrixXd& gain() const;

private:
  FeedbackLaw() = default;
  bool is_linear_ = false;
  int control_dim_ = 0;
  Eigen::MatrixXd gain_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn_;
};

Eigen::VectorXd evaluate_feedback(const FeedbackLaw& law,
                                  const Eigen::Ref<const Eigen::VectorXd>& x);

/// Basis choice for the scalar-valued side of the decomposition: explicit
/// kernel centers, or occupation kernels of a subset of the recorded
/// trajectories.
struct BasisSpec {
  enum class Kind { kernel_centers, data_centric };

  Kind kind = Kind::data_centric;
  Eigen::MatrixXd centers;       // kernel_centers: Ntilde x n
  std::vector<int> indices;      // data_centric: trajectory indices

  static BasisSpec kernel_basis(Eigen::MatrixXd centers);
  static BasisSpec data_centric(std::vector<int> indices);
  /// Data-centric basis over every trajectory of a dataset of size m.
  static BasisSpec data_centric_all(std::size_t m);

  Eigen::Index size() const {
    return kind == Kind::kernel_centers ? centers.rows()
                                        : static_cast<Eigen::Index>(indices.size());
  }
  void validate(const Dataset& ds) const;
};

/// Reads a manifest file ({"state_dim": n, "control_dim": m, "files": [...]})
/// and the trajectory CSVs it references (header t,x1,...,xn,u1,...,um).
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes trajectory CSVs plus a manifest into dir; returns the manifest
/// path. Values are printed with 17 significant digits so a reload
/// round-trips bit-exactly.
std::filesystem::path save_dataset(const Dataset& ds,
                                   const std::filesystem::path& dir);

}  // namespace cldmd

#endif
