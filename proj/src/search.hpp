#pragma once

#include <cmath>
#include <cstddef>

namespace concdiam::detail {

struct Maximum {
  double value;
  double argmax;
};

/// Maximizes f over lambda > 0: scans `points` log-spaced values in [lo, hi],
/// then refines the best bracket by golden-section search in log(lambda) until
/// its width is below `tol` (a relative width in lambda). If the scan peaks at
/// the top of the range the window slides up three decades at a time, so
/// objectives that tend to zero at infinity are still bracketed.
template <class F>
Maximum maximize_log_grid(F&& f, double lo, double hi, std::size_t points, double tol) {
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  const double step = (log_hi - log_lo) / static_cast<double>(points - 1);

  Maximum best{f(lo), lo};
  double best_log = log_lo;
  for (int window = 0; window < 4; ++window) {
    std::size_t best_k = 0;
    double window_best = -INFINITY;
    for (std::size_t k = 0; k < points; ++k) {
      const double x = log_lo + step * static_cast<double>(k);
      const double v = f(std::exp(x));
      if (v > window_best) {
        window_best = v;
        best_k = k;
      }
    }
    if (window_best > best.value) {
      best = {window_best, std::exp(log_lo + step * static_cast<double>(best_k))};
      best_log = log_lo + step * static_cast<double>(best_k);
    }
    if (best_k + 1 < points) break;
    log_lo = log_hi;
    log_hi = log_lo + step * static_cast<double>(points - 1);
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double a = best_log - step;
  double b = best_log + step;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(std::exp(d));
    }
  }
  if (fc > best.value) best = {fc, std::exp(c)};
  if (fd > best.value) best = {fd, std::exp(d)};
  return best;
}

}  // namespace concdiam::detail
