#include "pisac/asymptotics.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

#include "pisac/errors.hpp"

namespace pisac {

double kappa_general(const CMat& h_t, const CMat& h_d, double sigma_r2, int l) {
    if (h_t.rows() != h_d.rows() || h_t.cols() != h_d.cols())
        throw DimensionMismatch("H_t and H_d must have the same shape");
    const Eigen::Index m = h_d.rows();
    const CMat core = sigma_r2 * CMat::Identity(m, m) + h_d * h_d.adjoint();
    const CMat proj = h_d.adjoint() * core.llt().solve(h_d);  // C x C
    const double tr = (h_t * proj * h_t.adjoint()).trace().real();
    return std::max(0.0, 2.0 * l / sigma_r2 * tr);
}

AsymptoticPerf kappa_eigform(const CMat& h_t, const CMat& h_d, double sigma_r2, int l) {
    if (h_t.rows() != h_d.rows() || h_t.cols() != h_d.cols())
        throw DimensionMismatch("H_t and H_d must have the same shape");
    const auto eig = eigen_descending(h_d.adjoint() * h_d / sigma_r2);
    KappaDecomposition dec;
    dec.sigma_bar = eig.values.cwiseMax(0.0);
    dec.v = eig.vectors;
    const CMat target_gram = h_t.adjoint() * h_t;
    dec.delta.resize(eig.values.size());
    double sum = 0.0;
    for (Eigen::Index n = 0; n < eig.values.size(); ++n) {
        dec.delta(n) = dec.v.col(n).dot(target_gram * dec.v.col(n)).real();
        const double s = dec.sigma_bar(n);
        sum += s / (1.0 + s) * dec.delta(n);
    }
    AsymptoticPerf perf;
    perf.nu = static_cast<int>(2 * h_t.rows() * h_t.cols());
    perf.kappa = std::max(0.0, 2.0 * l / sigma_r2 * sum);
    perf.eigen_decomp = std::move(dec);
    return perf;
}

double kappa_single_cu(int l, int m, double snr_t_value, double snr_d_value) {
    return 2.0 * l * m * m * snr_t_value * snr_d_value / (1.0 + m * snr_d_value);
}

double kappa_active(int l, int m, double snr_t_value) { return 2.0 * l * m * snr_t_value; }

double snr_t(const CMat& h_t, double sigma_r2, int m) { return h_t.squaredNorm() / (m * sigma_r2); }
double snr_d(const CMat& h_d, double sigma_r2, int m) { return h_d.squaredNorm() / (m * sigma_r2); }

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 100000;

// P(s, x) by the power series, valid (fast) for x < s + 1.
double gamma_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < kMaxTerms; ++n) {
        term *= x / (s + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw NonConvergence("incomplete gamma series did not converge");
}

// Q(s, x) by the Legendre continued fraction (modified Lentz), for x >= s + 1.
double gamma_continued_fraction(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
    }
    throw NonConvergence("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_tail_regularized(double s, double x) {
    if (!(s > 0) || x < 0) throw ConfigError("gamma_tail_regularized needs s > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_series(s, x);
    return gamma_continued_fraction(s, x);
}

double gamma_head_regularized(double s, double x) {
    if (!(s > 0) || x < 0) throw ConfigError("gamma_head_regularized needs s > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_series(s, x);
    return 1.0 - gamma_continued_fraction(s, x);
}

double marcum_q(double m, double a, double b) {
    if (!(m > 0) || a < 0 || b < 0) throw ConfigError("marcum_q needs m > 0, a >= 0, b >= 0");
    if (b == 0.0) return 1.0;
    const double lambda = 0.5 * a * a;
    const double x = 0.5 * b * b;
    if (lambda == 0.0) return gamma_tail_regularized(m, x);

    // Poisson(lambda) mixture of Q(m + k, x), summed outward from the mode so
    // the weights never underflow. Truncation is controlled by a geometric
    // bound on the Poisson mass left in each tail (Q <= 1).
    constexpr double tol = 1e-13;
    constexpr long budget = 1000000;
    const long mode = static_cast<long>(std::floor(lambda));
    auto log_weight = [&](long k) { return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0); };
    double sum = 0.0;
    long used = 0;

    // Upward: k = mode, mode + 1, ...
    for (long k = mode;; ++k) {
        const double w = std::exp(log_weight(k));
        sum += w * gamma_tail_regularized(m + k, x);
        const double ratio = lambda / (k + 1.0);
        if (ratio < 1.0 && w * ratio / (1.0 - ratio) < tol) break;
        if (++used > budget) throw NonConvergence("marcum_q term budget exhausted");
    }
    // Downward: k = mode - 1, ..., 0.
    for (long k = mode - 1; k >= 0; --k) {
        const double w = std::exp(log_weight(k));
        sum += w * gamma_tail_regularized(m + k, x);
        const double ratio = k / lambda;
        if (ratio < 1.0 && w * ratio / (1.0 - ratio) < tol) break;
        if (++used > budget) throw NonConvergence("marcum_q term budget exhausted");
    }
    return std::clamp(sum, 0.0, 1.0);
}

double asymptotic_pfa(double rho, int nu) {
    if (rho <= 0.0) return 1.0;
    return gamma_tail_regularized(0.5 * nu, rho);
}

double asymptotic_pd(double rho, int nu, double kappa) {
    if (rho <= 0.0) return 1.0;
    return marcum_q(0.5 * nu, std::sqrt(std::max(kappa, 0.0)), std::sqrt(2.0 * rho));
}

double asymptotic_threshold(double pfa, int nu) {
    if (!(pfa > 0) || !(pfa < 1)) throw ConfigError("pfa must lie in (0, 1)");
    double lo = 0.0;
    double hi = 1.0;
    while (asymptotic_pfa(hi, nu) > pfa) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (asymptotic_pfa(mid, nu) > pfa)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace pisac
