#include "byzcubic/losses.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace byzcubic {

namespace {

using Real = long double;

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow
double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double dot(const Sample& s, const Vector& w) {
  Real acc = 0;
  for (const auto& f : s.features) acc += static_cast<Real>(f.value) * w[f.index];
  return static_cast<double>(acc);
}

// Per-sample curvature weight c such that the sample Hessian is c * x x^T,
// and gradient weight a such that the sample gradient is a * x.
struct SampleTerms {
  double loss;
  double grad_weight;
  double curvature;
};

SampleTerms logistic_terms(const Sample& s, const Vector& w) {
  const double z = s.label * dot(s, w);
  const double sz = sigmoid(z);
  return {softplus(-z), -s.label * sigmoid(-z), sz * (1.0 - sz)};
}

SampleTerms robust_terms(const Sample& s, const Vector& w) {
  const double r = s.label - dot(s, w);
  const double q = 0.5 * r * r + 1.0;
  return {std::log(q), -r / q, (1.0 - 0.5 * r * r) / (q * q)};
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::logistic: return "logistic";
    case LossKind::robust: return "robust";
    case LossKind::saddle: return "saddle";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "robust") return LossKind::robust;
  if (name == "saddle") return LossKind::saddle;
  return std::nullopt;
}

LossModel::LossModel(LossKind kind, SampleSet data, int dim,
                     double ridge_lambda)
    : kind_(kind), data_(std::move(data)), dim_(dim),
      ridge_lambda_(ridge_lambda) {
  if (dim_ < 1) throw DimensionError(fmt::format("loss dimension {} < 1", dim_));
  if (ridge_lambda_ < 0) {
    throw ConfigError(fmt::format("ridge lambda {} is negative", ridge_lambda_));
  }
  if (kind_ == LossKind::saddle) return;
  if (!data_ || data_->empty()) {
    throw Error(fmt::format("{} loss needs a non-empty sample set", to_string(kind_)));
  }
  ridge_count_ = static_cast<double>(data_->size());
  for (const auto& s : *data_) {
    if (!s.features.empty() && s.features.back().index >= dim_) {
      throw DimensionError(fmt::format("feature index {} outside dimension {}",
                                       s.features.back().index + 1, dim_));
    }
  }
}

LossModel LossModel::logistic(SampleSet data, int dim, double ridge_lambda) {
  return LossModel(LossKind::logistic, std::move(data), dim, ridge_lambda);
}

LossModel LossModel::robust_linear(SampleSet data, int dim) {
  return LossModel(LossKind::robust, std::move(data), dim, 0.0);
}

LossModel LossModel::strict_saddle(int dim) {
  return LossModel(LossKind::saddle, nullptr, dim, 0.0);
}

LossModel LossModel::make(LossKind kind, SampleSet data, int dim,
                          double ridge_lambda) {
  switch (kind) {
    case LossKind::logistic: return logistic(std::move(data), dim, ridge_lambda);
    case LossKind::robust: return robust_linear(std::move(data), dim);
    case LossKind::saddle: return strict_saddle(dim);
  }
  throw Error("unknown loss kind");
}

LossModel LossModel::rebind(SampleSet data) const {
  LossModel out(kind_, std::move(data), dim_, ridge_lambda_);
  out.hessian_limit_ = hessian_limit_;
  out.ridge_count_ = ridge_count_;
  return out;
}

void LossModel::check_dim(const Vector& w) const {
  if (w.size() != dim_) {
    throw DimensionError(
        fmt::format("parameter has dimension {}, loss expects {}", w.size(), dim_));
  }
}

double LossModel::value(const Vector& w) const {
  check_dim(w);
  if (kind_ == LossKind::saddle) {
    const double a = w[0] * w[0] - 1.0;
    Real acc = static_cast<Real>(a) * a;
    for (int j = 1; j < dim_; ++j) acc += static_cast<Real>(w[j]) * w[j];
    return static_cast<double>(acc);
  }
  const auto n = static_cast<double>(data_->size());
  Real acc = 0;
  for (const auto& s : *data_) {
    acc += kind_ == LossKind::logistic ? logistic_terms(s, w).loss
                                       : robust_terms(s, w).loss;
  }
  double out = static_cast<double>(acc / n);
  if (kind_ == LossKind::logistic && ridge_lambda_ > 0) {
    out += ridge_lambda_ / (2.0 * ridge_count_) * w.squaredNorm();
  }
  return out;
}

Vector LossModel::gradient(const Vector& w) const {
  check_dim(w);
  Vector g(dim_);
  if (kind_ == LossKind::saddle) {
    g[0] = 4.0 * w[0] * (w[0] * w[0] - 1.0);
    for (int j = 1; j < dim_; ++j) g[j] = 2.0 * w[j];
    return g;
  }
  const auto n = static_cast<double>(data_->size());
  std::vector<Real> acc(dim_, 0);
  for (const auto& s : *data_) {
    const double a = kind_ == LossKind::logistic ? logistic_terms(s, w).grad_weight
                                                 : robust_terms(s, w).grad_weight;
    for (const auto& f : s.features) acc[f.index] += static_cast<Real>(a) * f.value;
  }
  for (int j = 0; j < dim_; ++j) g[j] = static_cast<double>(acc[j] / n);
  if (kind_ == LossKind::logistic && ridge_lambda_ > 0) {
    g += (ridge_lambda_ / ridge_count_) * w;
  }
  return g;
}

Matrix LossModel::hessian(const Vector& w) const {
  check_dim(w);
  if (dim_ > hessian_limit_) {
    throw CapabilityError(fmt::format(
        "dense Hessian of dimension {} exceeds limit {}; Hessian-free mode is "
        "not supported",
        dim_, hessian_limit_));
  }
  Matrix h = Matrix::Zero(dim_, dim_);
  if (kind_ == LossKind::saddle) {
    h(0, 0) = 12.0 * w[0] * w[0] - 4.0;
    for (int j = 1; j < dim_; ++j) h(j, j) = 2.0;
    return h;
  }
  const auto n = static_cast<double>(data_->size());
  const auto d = static_cast<std::size_t>(dim_);
  // Upper triangle, column-major: (r, c) with r <= c lives at c * d + r.
  std::vector<Real> acc(d * d, 0);
  for (const auto& s : *data_) {
    const double c = kind_ == LossKind::logistic ? logistic_terms(s, w).curvature
                                                 : robust_terms(s, w).curvature;
    const auto& fs = s.features;
    for (std::size_t a = 0; a < fs.size(); ++a) {
      const Real ca = static_cast<Real>(c) * fs[a].value;
      for (std::size_t b = a; b < fs.size(); ++b) {
        acc[static_cast<std::size_t>(fs[b].index) * d + fs[a].index] += ca * fs[b].value;
      }
    }
  }
  for (int col = 0; col < dim_; ++col) {
    for (int row = 0; row <= col; ++row) {
      const double v = static_cast<double>(acc[static_cast<std::size_t>(col) * d + row] / n);
      h(row, col) = v;
      h(col, row) = v;
    }
  }
  if (kind_ == LossKind::logistic && ridge_lambda_ > 0) {
    h.diagonal().array() += ridge_lambda_ / ridge_count_;
  }
  return h;
}

}  // namespace byzcubic
