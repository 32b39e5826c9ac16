#include "byzcubic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace byzcubic {

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

double symmetric_spectral_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

Stationarity stationarity(const Vector& x, const LossModel& loss, double eps) {
  if (!(eps > 0)) throw Error(fmt::format("stationarity: eps = {} must be > 0", eps));
  Stationarity out;
  out.grad_norm = loss.gradient(x).norm();
  out.lambda_min = min_eigenvalue(loss.hessian(x));
  out.first_order_ok = out.grad_norm <= eps;
  out.second_order_ok = out.lambda_min >= -std::sqrt(eps);
  return out;
}

DeviationReport measure_deviation(std::span<const LossModel> shard_losses,
                                  const Vector& x, const LossModel& full) {
  const Vector g = full.gradient(x);
  const Matrix h = full.hessian(x);
  DeviationReport out;
  for (const auto& local : shard_losses) {
    out.gradient.push_back((local.gradient(x) - g).norm());
    out.hessian.push_back(symmetric_spectral_norm(local.hessian(x) - h));
    out.shard_sizes.push_back(local.num_samples());
  }
  return out;
}

std::optional<double> test_accuracy(const Vector& x,
                                    const std::vector<Sample>& test,
                                    LossKind loss) {
  if (loss != LossKind::logistic || test.empty()) return std::nullopt;
  std::size_t correct = 0;
  for (const auto& s : test) {
    double margin = 0.0;
    for (const auto& f : s.features) {
      if (f.index < x.size()) margin += f.value * x[f.index];
    }
    const double predicted = margin >= 0.0 ? 1.0 : -1.0;
    if (predicted == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

void write_csv(std::ostream& out, std::span<const IterationRecord> records) {
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string("NA");
  };
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.k, r.loss, r.grad_norm,
                       opt(r.lambda_min), opt(r.test_accuracy), r.comm_rounds,
                       fmt::join(r.kept_ids, ";"), r.wall_ms);
  }
}

}  // namespace byzcubic
