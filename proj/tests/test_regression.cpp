#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "epiphase/regression.hpp"
#include "epiphase/rng.hpp"

using namespace epiphase;

TEST_CASE("textbook four-point fit, checked by hand") {
    // x = 0..3, y = 1,3,2,5: sxx = 5, sxy = 5.5, syy = 8.75
    std::vector<double> x = {0, 1, 2, 3};
    std::vector<double> y = {1, 3, 2, 5};
    OlsFit f = ols_fit(x, y);
    CHECK(f.n == 4);
    CHECK(f.beta1 == Catch::Approx(1.1));
    CHECK(f.beta0 == Catch::Approx(1.1));
    CHECK(f.ssr == Catch::Approx(2.7));
    CHECK(f.r2 == Catch::Approx(1.0 - 2.7 / 8.75));
    // residual variance 2.7/2 = 1.35; se1 = sqrt(1.35/5)
    CHECK(f.se1 == Catch::Approx(std::sqrt(0.27)));
    CHECK(f.t1 == Catch::Approx(1.1 / std::sqrt(0.27)));
    // se0 = sqrt(1.35 * (1/4 + 1.5^2/5))
    CHECK(f.se0 == Catch::Approx(std::sqrt(1.35 * (0.25 + 2.25 / 5.0))));
    // adjusted R^2 = 1 - (1-R^2) * 3 / 2
    CHECK(f.adj_r2 == Catch::Approx(1.0 - (2.7 / 8.75) * 3.0 / 2.0));
    CHECK_FALSE(f.exact_fit);
    // for a bivariate fit, F is the squared slope t
    CHECK(f.f_stat == Catch::Approx(f.t1 * f.t1));
    CHECK(f.sig_f == Catch::Approx(f.p1).margin(1e-10));
}

TEST_CASE("student t tail probabilities against table values") {
    // two-sided 5% and 1% critical points from standard tables
    struct Row {
        int df;
        double t05, t01;
    };
    for (const Row& r : {Row{5, 2.571, 4.032}, Row{10, 2.228, 3.169}, Row{30, 2.042, 2.750}}) {
        CHECK(student_t_two_sided_p(r.t05, r.df) == Catch::Approx(0.05).margin(5e-4));
        CHECK(student_t_two_sided_p(r.t01, r.df) == Catch::Approx(0.01).margin(5e-4));
    }
    // symmetry and limits
    CHECK(student_t_two_sided_p(-2.571, 5) == Catch::Approx(student_t_two_sided_p(2.571, 5)));
    CHECK(student_t_two_sided_p(0.0, 7) == Catch::Approx(1.0));
    CHECK(student_t_two_sided_p(100.0, 7) < 1e-9);
}

TEST_CASE("F tail matches the squared-t identity numerically") {
    for (double t : {0.5, 1.3, 2.8}) {
        for (int df : {3, 9, 40}) {
            double pf = f_upper_tail_p(t * t, 1, df);
            double pt = student_t_two_sided_p(t, df);
            CHECK(pf == Catch::Approx(pt).margin(1e-6));
        }
    }
}

TEST_CASE("points on an exact line are flagged and inference collapses") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double xi : x) y.push_back(2.0 * xi + 1.0);
    OlsFit f = ols_fit(x, y);
    CHECK(f.exact_fit);
    CHECK(f.beta1 == Catch::Approx(2.0).margin(1e-12));
    CHECK(f.beta0 == Catch::Approx(1.0).margin(1e-12));
    CHECK(f.ssr == Catch::Approx(0.0).margin(1e-12));
    CHECK(f.se1 == 0.0);
    CHECK(f.p1 == 0.0);
    CHECK(f.r2 == Catch::Approx(1.0));
    CHECK(std::isinf(f.t1));
    CHECK(f.t1 > 0.0);
    CHECK(std::isinf(f.f_stat));
    CHECK(f.sig_f == 0.0);

    // a negative slope keeps the sign on the infinite t
    for (auto& v : y) v = -v;
    OlsFit g = ols_fit(x, y);
    CHECK(std::isinf(g.t1));
    CHECK(g.t1 < 0.0);
}

TEST_CASE("a constant response has zero slope and unit R2 by convention") {
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y = {5, 5, 5, 5};
    OlsFit f = ols_fit(x, y);
    CHECK(f.beta1 == Catch::Approx(0.0).margin(1e-12));
    CHECK(f.beta0 == Catch::Approx(5.0));
    CHECK(f.r2 == Catch::Approx(1.0));
    CHECK(f.exact_fit);
}

TEST_CASE("degenerate inputs are rejected") {
    std::vector<double> two = {1, 2};
    CHECK_THROWS_AS(ols_fit(two, two), Error);
    std::vector<double> x = {3, 3, 3, 3};
    std::vector<double> y = {1, 2, 3, 4};
    CHECK_THROWS_AS(ols_fit(x, y), Error);  // constant regressor
    std::vector<double> xs = {1, 2, 3};
    std::vector<double> ys = {1, 2};
    CHECK_THROWS_AS(ols_fit(xs, ys), Error);
}

TEST_CASE("estimates recover a planted linear relationship") {
    Rng rng(31);
    std::vector<double> x, y;
    for (int i = 0; i < 400; ++i) {
        double xi = rng.uniform01() * 10.0;
        x.push_back(xi);
        y.push_back(3.0 - 0.7 * xi + rng.normal(0.0, 0.5));
    }
    OlsFit f = ols_fit(x, y);
    CHECK(f.beta1 == Catch::Approx(-0.7).margin(0.05));
    CHECK(f.beta0 == Catch::Approx(3.0).margin(0.15));
    CHECK(f.p1 < 1e-6);
    // the planted slope should sit within a few standard errors
    CHECK(std::abs(f.beta1 + 0.7) < 4.0 * f.se1);
}

TEST_CASE("p values shrink as evidence accumulates") {
    // same slope, same noise; more points must not raise the p value much
    Rng rng(55);
    auto fit_n = [&](int n) {
        std::vector<double> x, y;
        Rng local(900 + n);
        for (int i = 0; i < n; ++i) {
            double xi = static_cast<double>(i) / n;
            x.push_back(xi);
            y.push_back(0.8 * xi + local.normal(0.0, 0.4));
        }
        return ols_fit(x, y);
    };
    OlsFit small = fit_n(20);
    OlsFit large = fit_n(400);
    CHECK(large.p1 < small.p1);
    CHECK(large.p1 < 1e-8);
}
