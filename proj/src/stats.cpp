#include "sdgen/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdgen {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = std::min(x.size(), y.size());
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0 || syy <= 0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

namespace {

// Upper 5% points of the chi-square distribution, df 1..30.
constexpr double kCrit05[30] = {
    3.841,  5.991,  7.815,  9.488,  11.070, 12.592, 14.067, 15.507, 16.919, 18.307,
    19.675, 21.026, 22.362, 23.685, 24.996, 26.296, 27.587, 28.869, 30.144, 31.410,
    32.671, 33.924, 35.172, 36.415, 37.652, 38.885, 40.113, 41.337, 42.557, 43.773};

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double chi_square_critical(int df, double alpha) {
    if (df < 1) throw std::invalid_argument("chi_square_critical: df < 1");
    if (alpha == 0.05 && df <= 30) return kCrit05[df - 1];
    double z = inverse_normal_cdf(1.0 - alpha);
    double k = static_cast<double>(df);
    double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * t * t * t;
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& counts,
                                        double alpha) {
    ChiSquareResult res;
    if (counts.empty() || counts[0].empty()) return res;
    size_t nr = counts.size(), nc = counts[0].size();
    std::vector<double> row_total(nr, 0), col_total(nc, 0);
    double grand = 0;
    for (size_t i = 0; i < nr; ++i) {
        if (counts[i].size() != nc)
            throw std::invalid_argument("chi_square_independence: ragged table");
        for (size_t j = 0; j < nc; ++j) {
            row_total[i] += counts[i][j];
            col_total[j] += counts[i][j];
            grand += counts[i][j];
        }
    }
    if (grand <= 0) return res;
    int live_rows = 0, live_cols = 0;
    for (double t : row_total)
        if (t > 0) ++live_rows;
    for (double t : col_total)
        if (t > 0) ++live_cols;
    res.df = (live_rows - 1) * (live_cols - 1);
    if (res.df < 1) return res;
    for (size_t i = 0; i < nr; ++i) {
        if (row_total[i] <= 0) continue;
        for (size_t j = 0; j < nc; ++j) {
            if (col_total[j] <= 0) continue;
            double expected = row_total[i] * col_total[j] / grand;
            double diff = counts[i][j] - expected;
            res.statistic += diff * diff / expected;
        }
    }
    res.critical = chi_square_critical(res.df, alpha);
    res.reject_independence = res.statistic > res.critical;
    return res;
}

}  // namespace sdgen
