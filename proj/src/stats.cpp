#include "sphere2b/stats.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "sphere2b/core.hpp"

namespace sphere2b {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error(ErrorKind::Domain, "linear fit needs two or more paired samples");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw Error(ErrorKind::DegenerateConfiguration, "abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / static_cast<double>(n));
    f.slope_stderr = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int order) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (order < 0 || n <= order || y.size() != x.size())
        throw Error(ErrorKind::Domain, "polynomial fit needs more samples than the order");
    Eigen::MatrixXd A(n, order + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1;
        for (int j = 0; j <= order; ++j) {
            A(i, j) = p;
            p *= x[static_cast<std::size_t>(i)];
        }
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    return {c.data(), c.data() + c.size()};
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace sphere2b
