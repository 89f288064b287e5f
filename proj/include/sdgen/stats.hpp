#pragma once

#include <vector>

namespace sdgen {

/// Sample Pearson correlation; NaN when either column is degenerate
/// (zero variance) or the series are shorter than 2.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Upper critical value of the chi-square distribution at significance
/// `alpha`. Exact tabulated values for alpha 0.05 and df 1..30; the
/// Wilson-Hilferty cube approximation otherwise.
double chi_square_critical(int df, double alpha = 0.05);

/// Inverse standard normal CDF (Acklam's rational approximation).
double inverse_normal_cdf(double p);

struct ChiSquareResult {
    double statistic = 0.0;
    int df = 0;
    double critical = 0.0;
    bool reject_independence = false;  // statistic > critical with df >= 1
};

/// Pearson chi-square test of independence on a contingency table of counts.
/// All-zero rows and columns are dropped before computing expectations.
ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& counts,
                                        double alpha = 0.05);

}  // namespace sdgen
