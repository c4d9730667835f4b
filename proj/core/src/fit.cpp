#include "hermlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hermlab {

LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("linear_fit: size mismatch");
  }
  LinearFit fit;
  fit.n = static_cast<int>(x.size());
  if (fit.n < 2) {
    fit.intercept = fit.n == 1 ? y[0] : 0.0;
    return fit;
  }
  double sx = 0, sy = 0;
  for (int i = 0; i < fit.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / fit.n, my = sy / fit.n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < fit.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (fit.n > 2) {
    double ss = 0;
    for (int i = 0; i < fit.n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ss += r * r;
    }
    fit.slope_stderr = std::sqrt(ss / (fit.n - 2) / sxx);
  }
  return fit;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace hermlab
