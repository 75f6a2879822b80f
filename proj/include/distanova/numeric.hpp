#pragma once

#include <cmath>

namespace distanova {

// Neumaier compensated accumulator; error stays O(eps) independent of the
// number of terms (trace sums here run over up to N^2 ~ 1e8 terms).
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

}  // namespace distanova
