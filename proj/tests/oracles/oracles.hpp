#pragma once

#include <functional>
#include <vector>

#include "pisac/linalg.hpp"
#include "pisac/random.hpp"

// Independent reference computations. Nothing here calls the library's
// statistics, kappa or special functions.
namespace pisac::oracle {

/// Derivative-free minimizer (Nelder-Mead) with restarts.
struct NelderMeadResult {
    RVec x;
    double value = 0.0;
    int evaluations = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& start, double step,
                             double tol = 1e-13, int max_evals = 200000);

/// Log-likelihood ratio of the two-channel model maximized numerically:
/// columns of y ~ CN(0, H H^H + s2 I), H = [H_t; H_d] (2M x C) free under H1,
/// H_t = 0 under H0.
double glrt_brute_force(const CMat& y, double sigma2, int c, Rng& rng, int restarts = 6);

/// 2 L M^2 SNR_t SNR_d / (1 + M SNR_d) with SNRs from elementwise sums.
double kappa_closed_form_single_cu(const CMat& h_t, const CMat& h_d, double sigma2, int l);

/// kappa from a dense inverse, straight from the trace expression.
double kappa_dense(const CMat& h_t, const CMat& h_d, double sigma2, int l);

/// Best kappa over w = sqrt(p_t) (cos a, sin a e^{jb}) on an n x n grid of
/// (a, b), for a two-antenna BS and one CU. mu_t / b_matrix rows describe
/// the channels.
double grid_search_kappa_two_antennas(const CVec& mu_t, const CMat& b_matrix, const CVec& a_t, double sigma2,
                                      int l, double p_t, int n);

/// Q(s, x) by adaptive quadrature of t^{s-1} e^{-t} / Gamma(s) over [x, inf).
double gamma_tail_quadrature(double s, double x);

/// Marcum Q_m(a, b) by adaptive quadrature of its defining integral.
double marcum_q_quadrature(int m, double a, double b);

/// Upper quantile of chi2(nu): P(X > q) = p.
double chi2_upper_quantile(double p, double nu);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace pisac::oracle
