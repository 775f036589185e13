#pragma once

#include <cstddef>

#include "rlab/strategy.hpp"
#include "rlab/tensor.hpp"

namespace rlab {

inline constexpr double kPsnrCapDb = 100.0;

/// 10 log10(1 / MSE) for images in [0, 1]; 100 dB when MSE < 1e-10.
double psnr(const DenseArray& a, const DenseArray& b);

/// Mean absolute difference over all elements.
double l1_image_distance(const DenseArray& a, const DenseArray& b);

/// Per-call latency accounting. The defaults are the full and reuse U-Net
/// call latencies quoted for Stable Diffusion; two passes per step model the
/// conditional + unconditional guidance passes.
struct CostModel {
  double full_call_ms = 152.0;
  double reuse_call_ms = 47.0;
  int passes_per_step = 2;

  void validate() const;
};

struct CostTally {
  int full_steps = 0;
  int reuse_steps = 0;
  double estimated_ms = 0.0;
  std::size_t cache_bytes = 0;
};

/// passes x (popcount * full + (N - popcount) * reuse)
double latency_estimate(const StrategyVector& strategy, const CostModel& model);

/// Latency of an N-step sampler that never reuses.
double full_latency(int steps, const CostModel& model);

}  // namespace rlab
