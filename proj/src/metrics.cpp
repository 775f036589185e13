#include "rlab/metrics.hpp"

#include <cmath>

#include "rlab/error.hpp"

namespace rlab {
namespace {

void require_same(const DenseArray& a, const DenseArray& b, const char* what) {
  if (!(a.shape() == b.shape())) {
    fail(ErrorKind::dimension, std::string(what) + ": shapes differ " + a.shape().str() + " vs " + b.shape().str());
  }
}

}  // namespace

double psnr(const DenseArray& a, const DenseArray& b) {
  require_same(a, b, "psnr");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.size());
  if (mse < 1e-10) return kPsnrCapDb;
  return 10.0 * std::log10(1.0 / mse);
}

double l1_image_distance(const DenseArray& a, const DenseArray& b) {
  require_same(a, b, "l1_image_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return sum / static_cast<double>(a.size());
}

void CostModel::validate() const {
  if (!(full_call_ms > reuse_call_ms) || !(reuse_call_ms > 0.0) || passes_per_step < 1) {
    fail(ErrorKind::config, "cost model needs full_call_ms > reuse_call_ms > 0 and passes_per_step >= 1");
  }
}

double latency_estimate(const StrategyVector& strategy, const CostModel& model) {
  model.validate();
  const int full = strategy.compute_count();
  const int reuse = strategy.size() - full;
  return model.passes_per_step * (full * model.full_call_ms + reuse * model.reuse_call_ms);
}

double full_latency(int steps, const CostModel& model) {
  model.validate();
  return model.passes_per_step * steps * model.full_call_ms;
}

}  // namespace rlab
