#include <doctest.h>

#include <cmath>

#include "sdgen/stats.hpp"

using namespace sdgen;

TEST_CASE("pearson on exact linear relation") {
    std::vector<double> x, y;
    for (int i = 1; i <= 10; ++i) {
        x.push_back(i);
        y.push_back(2.0 * i);
    }
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    for (auto& v : y) v = -v;
    CHECK(pearson(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson hand-computed fixture") {
    // x = {1,2,3,4}, y = {2,1,4,3}; means 2.5 each,
    // dx = {-1.5,-0.5,0.5,1.5}, dy = {-0.5,-1.5,1.5,0.5},
    // sxy = 4*0.75 = 3, sxx = syy = 5, r = 3/5.
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y = {2, 1, 4, 3};
    CHECK(pearson(x, y) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("pearson degenerate inputs") {
    CHECK(std::isnan(pearson({1.0}, {2.0})));
    CHECK(std::isnan(pearson({1, 1, 1}, {1, 2, 3})));
    CHECK(std::isnan(pearson({}, {})));
}

TEST_CASE("chi-square critical values at alpha 0.05") {
    CHECK(chi_square_critical(1) == doctest::Approx(3.841).epsilon(1e-9));
    CHECK(chi_square_critical(4) == doctest::Approx(9.488).epsilon(1e-9));
    CHECK(chi_square_critical(30) == doctest::Approx(43.773).epsilon(1e-9));
    // df > 30 uses the cube approximation; df=40 true value is 55.758
    CHECK(chi_square_critical(40) == doctest::Approx(55.758).epsilon(2e-3));
    // other alphas go through the approximation too; df=1 alpha=0.01 -> 6.635
    CHECK(chi_square_critical(1, 0.01) == doctest::Approx(6.635).epsilon(2e-2));
    CHECK_THROWS(chi_square_critical(0));
}

TEST_CASE("inverse normal cdf anchors") {
    CHECK(inverse_normal_cdf(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-6));
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-6));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-6));
    CHECK_THROWS(inverse_normal_cdf(0.0));
    CHECK_THROWS(inverse_normal_cdf(1.0));
}

TEST_CASE("chi-square statistic matches the hand formula on a 2x2 table") {
    // counts: [[10, 20], [30, 5]]
    // row totals 30, 35; col totals 40, 25; grand 65
    // E = [[30*40/65, 30*25/65], [35*40/65, 35*25/65]]
    std::vector<std::vector<double>> counts = {{10, 20}, {30, 5}};
    double e11 = 30.0 * 40 / 65, e12 = 30.0 * 25 / 65, e21 = 35.0 * 40 / 65, e22 = 35.0 * 25 / 65;
    double expected_stat = (10 - e11) * (10 - e11) / e11 + (20 - e12) * (20 - e12) / e12 +
                           (30 - e21) * (30 - e21) / e21 + (5 - e22) * (5 - e22) / e22;
    ChiSquareResult r = chi_square_independence(counts);
    CHECK(r.df == 1);
    CHECK(r.statistic == doctest::Approx(expected_stat).epsilon(1e-9));
    CHECK(r.critical == doctest::Approx(3.841).epsilon(1e-9));
    CHECK(r.reject_independence);
}

TEST_CASE("chi-square on an independent table does not reject") {
    // perfectly proportional rows -> statistic 0
    std::vector<std::vector<double>> counts = {{10, 20}, {20, 40}};
    ChiSquareResult r = chi_square_independence(counts);
    CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(r.reject_independence);
}

TEST_CASE("chi-square drops empty rows and columns") {
    std::vector<std::vector<double>> counts = {{10, 0, 20}, {0, 0, 0}, {30, 0, 5}};
    ChiSquareResult r = chi_square_independence(counts);
    CHECK(r.df == 1);  // 2 live rows, 2 live cols
    std::vector<std::vector<double>> reduced = {{10, 20}, {30, 5}};
    CHECK(r.statistic == doctest::Approx(chi_square_independence(reduced).statistic).epsilon(1e-12));
}

TEST_CASE("chi-square degenerate tables") {
    CHECK_FALSE(chi_square_independence({}).reject_independence);
    CHECK_FALSE(chi_square_independence({{5, 5}}).reject_independence);       // one row
    CHECK_FALSE(chi_square_independence({{5}, {5}}).reject_independence);     // one col
    CHECK_FALSE(chi_square_independence({{0, 0}, {0, 0}}).reject_independence);
    CHECK_THROWS(chi_square_independence({{1, 2}, {3}}));
}
