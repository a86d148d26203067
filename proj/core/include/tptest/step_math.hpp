#pragma once

/* Right-continuous step functions on a half-open interval (t_start, t_end].
 *
 * All estimated processes here (transition probabilities, influence curves,
 * weighted differences, multiplier realizations) are piecewise constant
 * between event times, so Lebesgue integrals and sup norms reduce to exact
 * finite sums over segments.  A StepProcess stores the value on the leading
 * segment (t_start, times[0]) separately: on a restricted comparison
 * interval that value is carried forward from events before t_start.
 */

#include <cmath>
#include <cstddef>
#include <vector>

namespace tptest {

// Index of the last element of `times` (ascending) that is <= t, or -1.
inline std::ptrdiff_t step_index(const std::vector<double>& times, double t) {
  std::ptrdiff_t lo = 0, hi = static_cast<std::ptrdiff_t>(times.size()) - 1, ans = -1;
  while (lo <= hi) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    if (times[static_cast<std::size_t>(mid)] <= t) {
      ans = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return ans;
}

struct StepProcess {
  double t_start = 0.0;
  double t_end = 0.0;
  double initial_value = 0.0;        // value on (t_start, times.front())
  std::vector<double> times;         // jump locations in (t_start, t_end], ascending
  std::vector<double> values;        // values.at(k) holds on [times[k], times[k+1])

  // Exact Lebesgue integral over (t_start, t_end].
  double integrate() const {
    if (times.empty()) return initial_value * (t_end - t_start);
    double acc = initial_value * (times.front() - t_start);
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
      acc += values[k] * (times[k + 1] - times[k]);
    acc += values.back() * (t_end - times.back());
    return acc;
  }

  double integrate_squared() const {
    if (times.empty()) return initial_value * initial_value * (t_end - t_start);
    double acc = initial_value * initial_value * (times.front() - t_start);
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
      acc += values[k] * values[k] * (times[k + 1] - times[k]);
    acc += values.back() * values.back() * (t_end - times.back());
    return acc;
  }

  double sup_abs() const {
    double m = std::abs(initial_value);
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  double value_at(double t) const {
    const std::ptrdiff_t k = step_index(times, t);
    return k < 0 ? initial_value : values[static_cast<std::size_t>(k)];
  }
};

}  // namespace tptest
