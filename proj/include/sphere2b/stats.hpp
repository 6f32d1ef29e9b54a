#pragma once

#include <vector>

namespace sphere2b {

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double slope_stderr = 0;
    double residual_rms = 0;
};

// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares polynomial coefficients c0..c_order, lowest first.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int order);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);

}  // namespace sphere2b
