#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pisac/linalg.hpp"
#include "pisac/random.hpp"
#include "pisac/waveform.hpp"

namespace pisac {

/// Passive GLRT statistic and the eigenvalue bookkeeping behind it.
struct GlrtResult {
    double statistic = 0.0;  ///< nats
    RVec psi;                ///< eigenvalues of X / sigma_r^2, decreasing (2M)
    RVec phi;                ///< eigenvalues of X_d / sigma_r^2, decreasing (M)
    int epsilon0 = 0;
    int zeta0 = 0;
};

enum class ThresholdMethod { empirical, asymptotic };

struct Threshold {
    double rho = 0.0;
    double pfa_target = 0.0;
    std::size_t n_trials = 0;
    ThresholdMethod method = ThresholdMethod::empirical;
    std::uint64_t seed = 0;
};

std::string to_string(ThresholdMethod method);

/// Passive GLRT on a 2M x L observation (target rows over direct rows).
GlrtResult glrt_statistic(const Observation& y, double sigma_r2, int c);
GlrtResult glrt_statistic(const CMat& y, double sigma_r2, int c);

/// Same statistic from a 2M x 2M sample covariance X = Y Y^H / L.
GlrtResult glrt_from_covariance(const CMat& sample_cov, double sigma_r2, int c, int l);

/// Closed form given the eigenvalues (decreasing order).
GlrtResult glrt_from_eigenvalues(const RVec& psi, const RVec& phi, int c, int l);

/// Active detector with known symbols: tr(Y S^H (S S^H)^-1 S Y^H) / sigma_r^2.
/// Under H0, 2 * statistic follows chi2(2 * rows(Y) * C).
double active_statistic(const CMat& y, const SymbolBlock& s, double sigma_r2);

/// One statistic per H0 trial; the trial index selects an independent RNG stream.
using TrialSampler = std::function<double(Rng& rng, std::size_t trial)>;

/// Runs n_trials H0 trials on streams (seed, trial) and returns the statistics
/// in trial order.
std::vector<double> sample_statistics(const TrialSampler& sampler, std::size_t n_trials, std::uint64_t seed);

/// k-th largest sample with k = ceil(n * pfa).
double threshold_from_samples(std::vector<double> samples, double pfa);

Threshold calibrate_threshold(const TrialSampler& sampler, double pfa, std::size_t n_trials, std::uint64_t seed);

enum class Decision { absent, target_present };

/// Strict comparison: present iff statistic > rho.
Decision decide(double statistic, const Threshold& threshold);

}  // namespace pisac
