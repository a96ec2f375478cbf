#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace finelogic::probe {

class SingleClassTrainingSet : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population std, 1 where a feature is constant

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

/// Mean log-loss plus ||w||² / (2 C n). Gradient is over (w, b); the bias is not penalized.
struct Objective {
  double value = 0;
  Eigen::VectorXd grad;  // size d + 1, bias last
};

/// Straight loop over rows; reference for the parallel kernel.
Objective logistic_objective_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb,
                                    double c);
/// Rows split into fixed blocks summed in block order, so the result does not
/// depend on the thread count.
Objective logistic_objective_parallel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb,
                                      double c);

struct FitOptions {
  double c = 1.0;
  double tolerance = 1e-8;  // infinity norm of the gradient
  bool parallel = false;
  /// Newton up to this many parameters, L-BFGS above.
  std::size_t newton_max_params = 1024;
  int max_iterations = 500;
};

/// Minimizes the objective on already-standardized features; returns (w, b).
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& opts);

struct ProbeOptions {
  std::vector<double> c_grid{0.01, 0.1, 1, 10, 100};
  int folds = 5;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  bool parallel = false;
};

struct Probe {
  Standardizer standardizer;
  Eigen::VectorXd weights;
  double bias = 0;
  double c = 1.0;
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<double> cv_accuracy;  // parallel to the grid

  double probability(const Eigen::VectorXd& x) const;
  /// Positive only when the probability exceeds 0.5.
  bool predict(const Eigen::VectorXd& x) const;
  std::vector<bool> predict_all(const Eigen::MatrixXd& x) const;
};

/// Fold of a problem id: a pure function of the id's hash and the seed.
int fold_of(const std::string& group, std::uint64_t seed, int folds);

/// Standardizes, picks C by grouped k-fold CV accuracy (ties keep the
/// smallest C), then refits on the full set.
Probe train_probe(const Eigen::MatrixXd& x, const std::vector<bool>& y, const std::vector<std::string>& groups,
                  const ProbeOptions& opts = {});

/// ½ (TPR + TNR).
double balanced_accuracy(const std::vector<bool>& predictions, const std::vector<bool>& labels);

nlohmann::json probe_to_json(const Probe& p);

}  // namespace finelogic::probe
