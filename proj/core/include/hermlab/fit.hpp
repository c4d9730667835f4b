#pragma once

#include <vector>

namespace hermlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);
double median(std::vector<double> v);  // takes a copy, sorts

}  // namespace hermlab
