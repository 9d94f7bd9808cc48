#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "subnewton/data.hpp"
#include "subnewton/linops.hpp"

namespace subnewton {

/// Component-level work performed against a model. One component function
/// value, gradient or Hessian-vector product is one unit; n units make one
/// effective gradient evaluation.
struct OracleCounter {
  std::uint64_t component_grads = 0;
  std::uint64_t component_hvs = 0;
  std::uint64_t component_fn_evals = 0;

  std::uint64_t units() const { return component_grads + component_hvs + component_fn_evals; }
  double effective_gradient_evals(std::size_t n) const {
    return static_cast<double>(units()) / static_cast<double>(n);
  }
};

/// log(1 + exp(-t)) without overflow.
double logistic_loss(double t);
/// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t);
/// sigma(t)(1 - sigma(t)), floored at 1e-300.
double logistic_curvature(double t);

/// Unregularized mean logistic loss of `w` on a dataset (reporting only).
double mean_logistic_loss(const Dataset& ds, std::span<const double> w);

class LogisticModel;

/// (1/|T|) sum_{i in T} d_i x_i x_i^T + lambda I with the curvature weights
/// frozen at construction. Reused across CG iterations.
class SubsampledHessian {
 public:
  SubsampledHessian(const LogisticModel& model, std::span<const double> w,
                    std::vector<std::size_t> subset);

  Vector apply(std::span<const double> v, OracleCounter* counter = nullptr) const;
  std::size_t size() const { return subset_.size(); }
  const std::vector<std::size_t>& subset() const { return subset_; }
  const Vector& weights() const { return weights_; }
  /// Densified d x d matrix (for spectra and direct solves).
  DenseMatrix dense() const;

 private:
  const LogisticModel* model_;
  std::vector<std::size_t> subset_;
  Vector weights_;
};

/// F(w) = (1/n) sum_i log(1 + exp(-y_i <w, x_i>)) + (lambda/2) ||w||^2.
class LogisticModel {
 public:
  /// lambda >= 0. Zero is accepted for oracle checks; the optimizers need lambda > 0.
  LogisticModel(Dataset data, double lambda);
  /// lambda = 1/n.
  explicit LogisticModel(Dataset data);

  std::size_t n() const { return data_.num_examples(); }
  std::size_t d() const { return data_.num_features(); }
  double lambda() const { return lambda_; }
  const Dataset& data() const { return data_; }

  /// Xw.
  Vector margins(std::span<const double> w) const;

  double value(std::span<const double> w, OracleCounter* counter = nullptr) const;
  Vector gradient(std::span<const double> w, OracleCounter* counter = nullptr) const;
  /// Gradient of F_i(w) = log(1 + exp(-y_i <w, x_i>)) + (lambda/2)||w||^2.
  Vector component_gradient(std::size_t i, std::span<const double> w,
                            OracleCounter* counter = nullptr) const;

  /// sigma(t_i)(1 - sigma(t_i)) with t_i = <w, x_i> for each i in subset.
  Vector diag_weights(std::span<const double> w, std::span<const std::size_t> subset) const;

  Vector hess_vec(std::span<const double> w, std::span<const double> v,
                  std::span<const std::size_t> subset, OracleCounter* counter = nullptr) const;
  /// Full-sample Hessian-vector product.
  Vector hess_vec(std::span<const double> w, std::span<const double> v,
                  OracleCounter* counter = nullptr) const;

  SubsampledHessian subsampled_hessian(std::span<const double> w,
                                       std::vector<std::size_t> subset) const;
  SubsampledHessian full_hessian(std::span<const double> w) const;

  /// (1/sqrt(n)) D^{1/2} X u, length n.
  Vector sqrt_hess_apply(std::span<const double> w, std::span<const double> u) const;
  /// (1/sqrt(n)) X^T D^{1/2} z, length d.
  Vector sqrt_hess_apply_t(std::span<const double> w, std::span<const double> z) const;

  /// Column j of diag(row_scale) X, length n. Does not materialize the scaled matrix.
  Vector scaled_column(std::size_t j, std::span<const double> row_scale) const;

  /// x_i . v for row i.
  double row_dot(std::size_t i, std::span<const double> v) const;
  /// y += alpha * x_i
  void row_axpy(std::size_t i, double alpha, std::span<double> y) const;
  double row_norm_sq(std::size_t i) const;

  std::vector<std::size_t> all_indices() const;

 private:
  void check_w(std::span<const double> w) const;

  Dataset data_;
  double lambda_;
  std::optional<CsrMatrix> columns_;  // transpose of X when stored as CSR
};

}  // namespace subnewton
