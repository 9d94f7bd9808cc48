#include "subnewton/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subnewton {

double logistic_loss(double t) { return std::log1p(std::exp(-std::abs(t))) + std::max(0.0, -t); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logistic_curvature(double t) {
  const double e = std::exp(-std::abs(t));
  return std::max(e / ((1.0 + e) * (1.0 + e)), 1e-300);
}

double mean_logistic_loss(const Dataset& ds, std::span<const double> w) {
  const Vector t = matvec(ds.features, w);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += logistic_loss(ds.labels[i] * t[i]);
  return t.empty() ? 0.0 : s / static_cast<double>(t.size());
}

LogisticModel::LogisticModel(Dataset data, double lambda) : data_(std::move(data)), lambda_(lambda) {
  data_.validate();
  if (data_.num_examples() == 0) throw std::invalid_argument("LogisticModel: empty dataset");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
    throw std::invalid_argument("LogisticModel: lambda must be finite and >= 0");
  if (const auto* csr = std::get_if<CsrMatrix>(&data_.features)) columns_ = csr->transposed();
}

LogisticModel::LogisticModel(Dataset data) : LogisticModel(std::move(data), 0.0) {
  lambda_ = 1.0 / static_cast<double>(n());
}

void LogisticModel::check_w(std::span<const double> w) const {
  if (w.size() != d())
    throw std::invalid_argument("LogisticModel: vector has length " + std::to_string(w.size()) +
                                ", expected " + std::to_string(d()));
}

Vector LogisticModel::margins(std::span<const double> w) const {
  check_w(w);
  return matvec(data_.features, w);
}

double LogisticModel::row_dot(std::size_t i, std::span<const double> v) const {
  if (const auto* dense = std::get_if<DenseMatrix>(&data_.features)) return dot(dense->row(i), v);
  const auto& csr = std::get<CsrMatrix>(data_.features);
  double s = 0.0;
  for (std::size_t k = csr.row_offsets()[i]; k < csr.row_offsets()[i + 1]; ++k)
    s += csr.values()[k] * v[csr.col_indices()[k]];
  return s;
}

void LogisticModel::row_axpy(std::size_t i, double alpha, std::span<double> y) const {
  if (const auto* dense = std::get_if<DenseMatrix>(&data_.features)) {
    axpy(alpha, dense->row(i), y);
    return;
  }
  const auto& csr = std::get<CsrMatrix>(data_.features);
  for (std::size_t k = csr.row_offsets()[i]; k < csr.row_offsets()[i + 1]; ++k)
    y[csr.col_indices()[k]] += alpha * csr.values()[k];
}

double LogisticModel::row_norm_sq(std::size_t i) const {
  if (const auto* dense = std::get_if<DenseMatrix>(&data_.features)) {
    const auto r = dense->row(i);
    return dot(r, r);
  }
  const auto& csr = std::get<CsrMatrix>(data_.features);
  double s = 0.0;
  for (std::size_t k = csr.row_offsets()[i]; k < csr.row_offsets()[i + 1]; ++k)
    s += csr.values()[k] * csr.values()[k];
  return s;
}

std::vector<std::size_t> LogisticModel::all_indices() const {
  std::vector<std::size_t> idx(n());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

double LogisticModel::value(std::span<const double> w, OracleCounter* counter) const {
  const Vector t = margins(w);
  double s = 0.0;
  for (std::size_t i = 0; i < n(); ++i) s += logistic_loss(data_.labels[i] * t[i]);
  if (counter) counter->component_fn_evals += n();
  return s / static_cast<double>(n()) + 0.5 * lambda_ * dot(w, w);
}

Vector LogisticModel::gradient(std::span<const double> w, OracleCounter* counter) const {
  const Vector t = margins(w);
  Vector coef(n());
  const double inv_n = 1.0 / static_cast<double>(n());
  for (std::size_t i = 0; i < n(); ++i) {
    const double y = data_.labels[i];
    coef[i] = -sigmoid(-y * t[i]) * y * inv_n;
  }
  Vector g = matvec_t(data_.features, coef);
  axpy(lambda_, w, g);
  if (counter) counter->component_grads += n();
  return g;
}

Vector LogisticModel::component_gradient(std::size_t i, std::span<const double> w,
                                         OracleCounter* counter) const {
  check_w(w);
  if (i >= n()) throw std::out_of_range("component_gradient: index out of range");
  const double y = data_.labels[i];
  Vector g(w.begin(), w.end());
  scale(lambda_, g);
  row_axpy(i, -sigmoid(-y * row_dot(i, w)) * y, g);
  if (counter) counter->component_grads += 1;
  return g;
}

Vector LogisticModel::diag_weights(std::span<const double> w,
                                   std::span<const std::size_t> subset) const {
  check_w(w);
  Vector out;
  out.reserve(subset.size());
  for (std::size_t i : subset) {
    if (i >= n()) throw std::out_of_range("diag_weights: index out of range");
    out.push_back(logistic_curvature(row_dot(i, w)));
  }
  return out;
}

SubsampledHessian::SubsampledHessian(const LogisticModel& model, std::span<const double> w,
                                     std::vector<std::size_t> subset)
    : model_(&model), subset_(std::move(subset)) {
  if (subset_.empty()) throw std::invalid_argument("hess_vec: empty subset");
  weights_ = model.diag_weights(w, subset_);
}

Vector SubsampledHessian::apply(std::span<const double> v, OracleCounter* counter) const {
  if (v.size() != model_->d()) throw std::invalid_argument("hess_vec: dimension mismatch");
  Vector out(v.size(), 0.0);
  for (std::size_t k = 0; k < subset_.size(); ++k) {
    const std::size_t i = subset_[k];
    const double s = weights_[k] * model_->row_dot(i, v);
    if (s != 0.0) model_->row_axpy(i, s, out);
  }
  scale(1.0 / static_cast<double>(subset_.size()), out);
  axpy(model_->lambda(), v, out);
  if (counter) counter->component_hvs += subset_.size();
  return out;
}

DenseMatrix SubsampledHessian::dense() const {
  const std::size_t d = model_->d();
  DenseMatrix h(d, d);
  Vector row(d);
  for (std::size_t k = 0; k < subset_.size(); ++k) {
    std::fill(row.begin(), row.end(), 0.0);
    model_->row_axpy(subset_[k], 1.0, row);
    const double wk = weights_[k];
    for (std::size_t a = 0; a < d; ++a) {
      if (row[a] == 0.0) continue;
      const double ra = wk * row[a];
      for (std::size_t b = a; b < d; ++b) h(a, b) += ra * row[b];
    }
  }
  const double inv = 1.0 / static_cast<double>(subset_.size());
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      h(a, b) *= inv;
      h(b, a) = h(a, b);
    }
    h(a, a) += model_->lambda();
  }
  return h;
}

SubsampledHessian LogisticModel::subsampled_hessian(std::span<const double> w,
                                                    std::vector<std::size_t> subset) const {
  return SubsampledHessian(*this, w, std::move(subset));
}

SubsampledHessian LogisticModel::full_hessian(std::span<const double> w) const {
  return SubsampledHessian(*this, w, all_indices());
}

Vector LogisticModel::hess_vec(std::span<const double> w, std::span<const double> v,
                               std::span<const std::size_t> subset, OracleCounter* counter) const {
  return SubsampledHessian(*this, w, {subset.begin(), subset.end()}).apply(v, counter);
}

Vector LogisticModel::hess_vec(std::span<const double> w, std::span<const double> v,
                               OracleCounter* counter) const {
  return full_hessian(w).apply(v, counter);
}

Vector LogisticModel::sqrt_hess_apply(std::span<const double> w, std::span<const double> u) const {
  if (u.size() != d()) throw std::invalid_argument("sqrt_hess_apply: dimension mismatch");
  const Vector t = margins(w);
  Vector out = matvec(data_.features, u);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
  for (std::size_t i = 0; i < n(); ++i) out[i] *= std::sqrt(logistic_curvature(t[i])) * inv_sqrt_n;
  return out;
}

Vector LogisticModel::sqrt_hess_apply_t(std::span<const double> w, std::span<const double> z) const {
  if (z.size() != n()) throw std::invalid_argument("sqrt_hess_apply_t: dimension mismatch");
  const Vector t = margins(w);
  Vector scaled(n());
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
  for (std::size_t i = 0; i < n(); ++i)
    scaled[i] = std::sqrt(logistic_curvature(t[i])) * inv_sqrt_n * z[i];
  return matvec_t(data_.features, scaled);
}

Vector LogisticModel::scaled_column(std::size_t j, std::span<const double> row_scale) const {
  if (j >= d()) throw std::out_of_range("scaled_column: column out of range");
  if (row_scale.size() != n()) throw std::invalid_argument("scaled_column: dimension mismatch");
  Vector col(n(), 0.0);
  if (const auto* dense = std::get_if<DenseMatrix>(&data_.features)) {
    for (std::size_t i = 0; i < n(); ++i) col[i] = (*dense)(i, j) * row_scale[i];
  } else {
    const CsrMatrix& xt = *columns_;
    for (std::size_t k = xt.row_offsets()[j]; k < xt.row_offsets()[j + 1]; ++k) {
      const std::size_t i = xt.col_indices()[k];
      col[i] = xt.values()[k] * row_scale[i];
    }
  }
  return col;
}

}  // namespace subnewton
