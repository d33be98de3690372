#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"

namespace epiphase {

namespace detail {

// ln Γ(x) for x > 0, Lanczos approximation (g = 5, n = 6), good to ~1e-13.
inline double ln_gamma(double x) {
    static const double coef[6] = {76.18009172947146,  -86.50532032941677, 24.01409824083091,
                                   -1.231739572450155, 0.1208650973866179e-2, -0.5395239384953e-5};
    double y = x;
    double tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    double ser = 1.000000000190015;
    for (double c : coef) ser += c / ++y;
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    const double eps = 1e-12;
    const double fpmin = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    raise(Errc::invalid_argument, "incomplete beta did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b), the workhorse behind both the t and
// F tail probabilities.  Converges to ~1e-12 relative accuracy.
inline double reg_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) raise(Errc::invalid_argument, "beta parameters must be positive");
    if (x < 0.0 || x > 1.0) raise(Errc::invalid_argument, "beta argument outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = detail::ln_gamma(a + b) - detail::ln_gamma(a) - detail::ln_gamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    // Use the continued fraction directly where it converges fast, else the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a t statistic with df degrees of freedom:
// P(|T| >= |t|) = I_x(df/2, 1/2) with x = df/(df + t^2).
inline double student_t_two_sided_p(double t, int df) {
    if (df < 1) raise(Errc::invalid_argument, "degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    return reg_incomplete_beta(0.5 * df, 0.5, x);
}

// Upper tail P(F >= f) of an F distribution with (d1, d2) degrees of freedom:
// I_x(d2/2, d1/2) with x = d2/(d2 + d1 f).
inline double f_upper_tail_p(double f, int d1, int d2) {
    if (d1 < 1 || d2 < 1) raise(Errc::invalid_argument, "degrees of freedom must be positive");
    if (f < 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    double x = d2 / (d2 + static_cast<double>(d1) * f);
    return reg_incomplete_beta(0.5 * d2, 0.5 * d1, x);
}

// Full bivariate least-squares fit y = beta0 + beta1 x with the standard
// normal-theory inference: standard errors, two-sided t p-values, R^2 and
// its adjusted form, and the slope F test against the intercept-only model.
// When the line passes exactly through every point (ssr == 0) the noise
// scale is zero; the fit is flagged exact and se = 0, p = 0 are reported
// instead of dividing by zero.
struct OlsFit {
    int n = 0;
    double beta0 = 0.0, beta1 = 0.0;
    double se0 = 0.0, se1 = 0.0;
    double t0 = 0.0, t1 = 0.0;
    double p0 = 0.0, p1 = 0.0;
    double r2 = 0.0, adj_r2 = 0.0;
    double f_stat = 0.0, sig_f = 0.0;
    double ssr = 0.0;
    bool exact_fit = false;
};

inline OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) raise(Errc::invalid_argument, "x and y differ in length");
    std::size_t n = x.size();
    if (n < 3) raise(Errc::insufficient_data, "bivariate fit needs at least 3 observations");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) raise(Errc::degenerate_regressor, "regressor has zero variance");

    OlsFit fit;
    fit.n = static_cast<int>(n);
    fit.beta1 = sxy / sxx;
    fit.beta0 = my - fit.beta1 * mx;

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - (fit.beta0 + fit.beta1 * x[i]);
        ssr += e * e;
    }
    fit.ssr = ssr;
    int df = fit.n - 2;
    double dn = static_cast<double>(n);

    if (syy == 0.0) {
        // Constant response: the flat line is an exact fit.
        fit.r2 = 1.0;
        fit.adj_r2 = 1.0;
    } else {
        fit.r2 = 1.0 - ssr / syy;
        fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (dn - 1.0) / static_cast<double>(df);
    }

    if (ssr == 0.0) {
        fit.exact_fit = true;
        double inf = std::numeric_limits<double>::infinity();
        fit.t0 = fit.beta0 == 0.0 ? 0.0 : std::copysign(inf, fit.beta0);
        fit.t1 = fit.beta1 == 0.0 ? 0.0 : std::copysign(inf, fit.beta1);
        fit.f_stat = std::numeric_limits<double>::infinity();
        fit.sig_f = 0.0;
        return fit;
    }

    double mse = ssr / static_cast<double>(df);
    fit.se1 = std::sqrt(mse / sxx);
    fit.se0 = std::sqrt(mse * (1.0 / dn + mx * mx / sxx));
    fit.t0 = fit.beta0 / fit.se0;
    fit.t1 = fit.beta1 / fit.se1;
    fit.p0 = student_t_two_sided_p(fit.t0, df);
    fit.p1 = student_t_two_sided_p(fit.t1, df);
    fit.f_stat = (syy - ssr) / mse;
    fit.sig_f = f_upper_tail_p(fit.f_stat, 1, df);
    return fit;
}

}  // namespace epiphase
