#pragma once

#include <optional>

#include "pisac/linalg.hpp"

namespace pisac {

/// Eigen-structure behind the non-centrality parameter: sigma_bar are the
/// eigenvalues of H_d^H H_d / sigma_r^2 (decreasing), v their eigenvectors,
/// delta_n = v_n^H H_t^H H_t v_n.
struct KappaDecomposition {
    RVec sigma_bar;
    RVec delta;
    CMat v;
};

struct AsymptoticPerf {
    int nu = 0;  ///< 2 M C
    double kappa = 0.0;
    std::optional<KappaDecomposition> eigen_decomp;
};

/// kappa = (2L / s2) tr[H_t H_d^H (s2 I + H_d H_d^H)^-1 H_d H_t^H].
double kappa_general(const CMat& h_t, const CMat& h_d, double sigma_r2, int l);

/// kappa = (2L / s2) sum_n sigma_n / (1 + sigma_n) delta_n.
AsymptoticPerf kappa_eigform(const CMat& h_t, const CMat& h_d, double sigma_r2, int l);

/// Single-CU closed form 2 L M^2 SNR_t SNR_d / (1 + M SNR_d).
double kappa_single_cu(int l, int m, double snr_t, double snr_d);

/// Active-detection non-centrality 2 L M SNR_t.
double kappa_active(int l, int m, double snr_t);

/// tr(H H^H) / (M s2).
double snr_t(const CMat& h_t, double sigma_r2, int m);
double snr_d(const CMat& h_d, double sigma_r2, int m);

/// Right tail of chi2(nu) at 2 rho.
double asymptotic_pfa(double rho, int nu);
/// Q_{nu/2}(sqrt(kappa), sqrt(2 rho)).
double asymptotic_pd(double rho, int nu, double kappa);
/// Threshold rho with asymptotic_pfa(rho, nu) = pfa, by bisection (1e-12 abs).
double asymptotic_threshold(double pfa, int nu);

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double gamma_tail_regularized(double s, double x);
/// Regularized lower incomplete gamma P(s, x) = 1 - Q(s, x).
double gamma_head_regularized(double s, double x);

/// Generalized Marcum Q-function of (real, positive) order m.
double marcum_q(double m, double a, double b);

}  // namespace pisac
