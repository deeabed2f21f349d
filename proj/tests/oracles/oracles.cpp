#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pisac::oracle {

NelderMeadResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& start, double step,
                             double tol, int max_evals) {
    const int n = static_cast<int>(start.size());
    std::vector<RVec> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    int evals = 0;
    auto eval = [&](const RVec& x) {
        ++evals;
        return f(x);
    };
    auto reset = [&](const RVec& base, double h) {
        pts[0] = base;
        for (int i = 0; i < n; ++i) {
            pts[i + 1] = base;
            pts[i + 1](i) += h;
        }
        for (int i = 0; i <= n; ++i) vals[i] = eval(pts[i]);
    };
    reset(start, step);
    double best_prev = std::numeric_limits<double>::infinity();
    while (evals < max_evals) {
        // One full Nelder-Mead descent.
        while (evals < max_evals) {
            std::vector<int> idx(n + 1);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
            std::vector<RVec> p2;
            std::vector<double> v2;
            for (int i : idx) {
                p2.push_back(pts[i]);
                v2.push_back(vals[i]);
            }
            pts = p2;
            vals = v2;
            if (std::abs(vals[n] - vals[0]) <= tol * (std::abs(vals[0]) + tol)) break;
            RVec centroid = RVec::Zero(n);
            for (int i = 0; i < n; ++i) centroid += pts[i];
            centroid /= n;
            const RVec xr = centroid + (centroid - pts[n]);
            const double fr = eval(xr);
            if (fr < vals[0]) {
                const RVec xe = centroid + 2.0 * (centroid - pts[n]);
                const double fe = eval(xe);
                if (fe < fr) {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
            } else if (fr < vals[n - 1]) {
                pts[n] = xr;
                vals[n] = fr;
            } else {
                const bool outside = fr < vals[n];
                const RVec xc = outside ? RVec(centroid + 0.5 * (xr - centroid)) : RVec(centroid + 0.5 * (pts[n] - centroid));
                const double fc = eval(xc);
                if (fc < std::min(fr, vals[n])) {
                    pts[n] = xc;
                    vals[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                        vals[i] = eval(pts[i]);
                    }
                }
            }
        }
        const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
        if (best_prev - vals[best] <= tol * (std::abs(vals[best]) + tol)) {
            return {pts[best], vals[best], evals};
        }
        best_prev = vals[best];
        // Restart around the incumbent to escape a collapsed simplex.
        double spread = 0.0;
        for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).norm());
        reset(pts[best], std::max(10.0 * spread, 1e-3 * step));
    }
    const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], evals};
}

namespace {

CMat unpack(const RVec& x, int rows, int cols) {
    CMat h(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const int k = 2 * (j * rows + i);
            h(i, j) = cplx(x(k), x(k + 1));
        }
    return h;
}

// -(ln det R + tr(R^-1 X)) per snapshot.
double loglik(const CMat& r, const CMat& x) {
    Eigen::LLT<CMat> llt(r);
    if (llt.info() != Eigen::Success) return -1e300;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) logdet += 2.0 * std::log(std::real(llt.matrixL()(i, i)));
    const CMat rx = llt.solve(x);
    return -(logdet + rx.trace().real());
}

}  // namespace

double glrt_brute_force(const CMat& y, double sigma2, int c, Rng& rng, int restarts) {
    const int m = static_cast<int>(y.rows() / 2);
    const double l = static_cast<double>(y.cols());
    const CMat x = y * y.adjoint() / l;
    const double scale = std::sqrt(x.trace().real() / (2.0 * m));

    auto h1 = [&](const RVec& p) {
        const CMat h = unpack(p, 2 * m, c);
        return -loglik(h * h.adjoint() + sigma2 * CMat::Identity(2 * m, 2 * m), x);
    };
    auto h0 = [&](const RVec& p) {
        const CMat hd = unpack(p, m, c);
        CMat r = sigma2 * CMat::Identity(2 * m, 2 * m);
        r.bottomRightCorner(m, m) += hd * hd.adjoint();
        return -loglik(r, x);
    };
    std::normal_distribution<double> n01(0.0, 1.0);
    auto best_of = [&](const std::function<double(const RVec&)>& f, int dim) {
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            RVec start(dim);
            for (int i = 0; i < dim; ++i) start(i) = scale * n01(rng);
            best = std::min(best, nelder_mead(f, start, 0.5 * scale).value);
        }
        return best;
    };
    const double l1 = -best_of(h1, 4 * m * c);
    const double l0 = -best_of(h0, 2 * m * c);
    return l * (l1 - l0);
}

double kappa_closed_form_single_cu(const CMat& h_t, const CMat& h_d, double sigma2, int l) {
    const double m = static_cast<double>(h_t.rows());
    double st = 0.0, sd = 0.0;
    for (Eigen::Index i = 0; i < h_t.size(); ++i) st += std::norm(h_t(i));
    for (Eigen::Index i = 0; i < h_d.size(); ++i) sd += std::norm(h_d(i));
    st /= m * sigma2;
    sd /= m * sigma2;
    return 2.0 * l * m * m * st * sd / (1.0 + m * sd);
}

double kappa_dense(const CMat& h_t, const CMat& h_d, double sigma2, int l) {
    const Eigen::Index m = h_t.rows();
    const CMat inner = (sigma2 * CMat::Identity(m, m) + h_d * h_d.adjoint()).inverse();
    return 2.0 * l / sigma2 * (h_t * h_d.adjoint() * inner * h_d * h_t.adjoint()).trace().real();
}

double grid_search_kappa_two_antennas(const CVec& mu_t, const CMat& b_matrix, const CVec& a_t, double sigma2,
                                      int l, double p_t, int n) {
    double best = 0.0;
    const double sigma = std::sqrt(sigma2);
    for (int i = 0; i < n; ++i) {
        const double a = 0.5 * 3.14159265358979323846 * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double b = 2.0 * 3.14159265358979323846 * j / n;
            CVec w(2);
            w << std::sqrt(p_t) * std::cos(a), std::sqrt(p_t) * std::sin(a) * std::polar(1.0, b);
            const CMat h_t = mu_t * (a_t.adjoint() * w);
            const CMat h_d = sigma * (b_matrix * w);
            best = std::max(best, kappa_dense(h_t, h_d, sigma2, l));
        }
    }
    return best;
}

double gamma_tail_quadrature(double s, double x) {
    const double lg = std::lgamma(s);
    auto f = [&](double t) { return t <= 0 ? (s == 1.0 ? 1.0 : 0.0) : std::exp((s - 1.0) * std::log(t) - t - lg); };
    const double upper = x + s + 60.0 * std::sqrt(s + 1.0) + 100.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, x, upper, 25, 1e-15, &err);
}

double marcum_q_quadrature(int m, double a, double b) {
    const double upper = std::max(a, b) + 40.0;
    auto f = [&](double x) {
        if (x <= 0) return 0.0;
        double log_term;
        if (a == 0.0) {
            log_term = (2.0 * m - 1.0) * std::log(x) - x * x / 2.0 - (m - 1.0) * std::log(2.0) - std::lgamma(m);
        } else {
            const double bessel = std::cyl_bessel_i(static_cast<double>(m - 1), a * x);
            if (bessel <= 0) return 0.0;
            log_term = std::log(x) + (m - 1.0) * (std::log(x) - std::log(a)) - (x * x + a * a) / 2.0 + std::log(bessel);
        }
        return std::exp(log_term);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b, upper, 25, 1e-15, &err);
}

double chi2_upper_quantile(double p, double nu) {
    boost::math::chi_squared_distribution<double> d(nu);
    return boost::math::quantile(boost::math::complement(d, p));
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    const double lambda = (en + 0.12 + 0.11 / en) * d;
    if (lambda < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace pisac::oracle
