#include "bnuq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bnuq {

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& f) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(bnuq_for_each_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

double shift_for(std::span<const double> v, double c) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, c * x);
  return m;
}

TiltedSums combine(const TiltedSums& a, const TiltedSums& b) {
  return {a.shift, a.w + b.w, a.wv + b.wv, a.wv2 + b.wv2, a.w2 + b.w2, a.n + b.n};
}

}  // namespace

TiltedSums tilted_sums_reference(std::span<const double> v, double c) {
  TiltedSums s;
  s.shift = shift_for(v, c);
  s.n = v.size();
  for (double x : v) {
    const double w = std::exp(c * x - s.shift);
    s.w += w;
    s.wv += w * x;
    s.wv2 += w * x * x;
    s.w2 += w * w;
  }
  return s;
}

TiltedSums tilted_sums(std::span<const double> v, double c, Exec exec) {
  const double shift = shift_for(v, c);
  const std::size_t blocks = (v.size() + kReduceBlock - 1) / kReduceBlock;
  std::vector<TiltedSums> part(std::max<std::size_t>(blocks, 1));
  auto block = [&](std::size_t b) {
    TiltedSums s;
    s.shift = shift;
    const std::size_t lo = b * kReduceBlock;
    const std::size_t hi = std::min(v.size(), lo + kReduceBlock);
    s.n = hi - lo;
    for (std::size_t j = lo; j < hi; ++j) {
      const double x = v[j];
      const double w = std::exp(c * x - shift);
      s.w += w;
      s.wv += w * x;
      s.wv2 += w * x * x;
      s.w2 += w * w;
    }
    part[b] = s;
  };
  if (exec == Exec::parallel && blocks > 1) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
      block(static_cast<std::size_t>(b));
    }
  } else {
    for (std::size_t b = 0; b < blocks; ++b) block(b);
  }
  for (std::size_t stride = 1; stride < part.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < part.size(); i += 2 * stride) {
      part[i] = combine(part[i], part[i + stride]);
    }
  }
  part[0].shift = shift;
  return part[0];
}

double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace bnuq
