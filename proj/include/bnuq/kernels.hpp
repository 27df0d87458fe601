#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace bnuq {

enum class Exec { serial, parallel };

// Rows per independently seeded sampling block, and values per reduction block.
inline constexpr std::size_t kSampleBlock = 4096;
inline constexpr std::size_t kReduceBlock = 8192;

void set_thread_count(int threads);
int thread_count();

// Runs f(i) for i in [0, n). Parallel mode uses OpenMP with dynamic scheduling;
// callers write results to index-addressed slots so output order is fixed.
void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& f);

// Sum of exp(c v - shift) weights and weighted moments, shift = max_j c v_j.
struct TiltedSums {
  double shift = 0.0;
  double w = 0.0;
  double wv = 0.0;
  double wv2 = 0.0;
  double w2 = 0.0;
  std::size_t n = 0;
};

// Serial reference: one left-to-right pass.
TiltedSums tilted_sums_reference(std::span<const double> v, double c);
// Blocked partial sums combined by a fixed pairwise tree; result independent
// of thread count.
TiltedSums tilted_sums(std::span<const double> v, double c, Exec exec = Exec::parallel);

double pairwise_sum(std::span<const double> v);

}  // namespace bnuq
