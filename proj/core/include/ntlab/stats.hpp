#pragma once

#include <cstddef>
#include <vector>

namespace ntlab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope * x + intercept; needs two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Same on (log x, log y).
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ntlab
