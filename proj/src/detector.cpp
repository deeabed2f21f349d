#include "pisac/detector.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pisac/errors.hpp"
#include "pisac/parallel.hpp"

namespace pisac {

std::string to_string(ThresholdMethod method) {
    return method == ThresholdMethod::empirical ? "empirical" : "asymptotic";
}

GlrtResult glrt_from_eigenvalues(const RVec& psi, const RVec& phi, int c, int l) {
    GlrtResult r;
    r.psi = psi;
    r.phi = phi;
    const int count_psi = static_cast<int>((psi.array() >= 1.0).count());
    const int count_phi = static_cast<int>((phi.array() >= 1.0).count());
    r.epsilon0 = std::min({count_psi, c, static_cast<int>(psi.size())});
    r.zeta0 = std::min({count_phi, c, static_cast<int>(phi.size())});
    // Each kept eigenvalue contributes ln(x) - x + 1 <= 0; summing these keeps
    // the cancellation between the two hypotheses well conditioned.
    double acc = 0.0;
    for (int i = 0; i < r.zeta0; ++i) acc += std::log(phi(i)) - phi(i) + 1.0;
    for (int i = 0; i < r.epsilon0; ++i) acc -= std::log(psi(i)) - psi(i) + 1.0;
    r.statistic = static_cast<double>(l) * acc;
    return r;
}

GlrtResult glrt_from_covariance(const CMat& sample_cov, double sigma_r2, int c, int l) {
    if (sample_cov.rows() != sample_cov.cols() || sample_cov.rows() % 2 != 0)
        throw DimensionMismatch("sample covariance must be 2M x 2M");
    if (!(sigma_r2 > 0)) throw ConfigError("sigma_r2 must be positive");
    const Eigen::Index m = sample_cov.rows() / 2;
    const CMat scaled = sample_cov / sigma_r2;
    const RVec psi = eigenvalues_descending(scaled);
    const RVec phi = eigenvalues_descending(scaled.bottomRightCorner(m, m));
    return glrt_from_eigenvalues(psi, phi, c, l);
}

GlrtResult glrt_statistic(const CMat& y, double sigma_r2, int c) {
    if (y.rows() < 2 || y.rows() % 2 != 0) throw DimensionMismatch("observation must have 2M rows");
    if (y.cols() < y.rows()) throw DimensionMismatch("GLRT needs L >= 2M snapshots");
    const auto l = static_cast<int>(y.cols());
    CMat x = CMat::Zero(y.rows(), y.rows());
    x.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / l);
    x = x.selfadjointView<Eigen::Lower>();
    return glrt_from_covariance(x, sigma_r2, c, l);
}

GlrtResult glrt_statistic(const Observation& y, double sigma_r2, int c) {
    return glrt_statistic(y.y, sigma_r2, c);
}

double active_statistic(const CMat& y, const SymbolBlock& s, double sigma_r2) {
    const CMat& sym = s.data;
    if (y.cols() != sym.cols()) throw DimensionMismatch("Y and S must have the same number of snapshots");
    if (sym.cols() <= sym.rows()) throw SingularGram("active detector needs L > C");
    const CMat gram = sym * sym.adjoint();
    const RVec ev = eigenvalues_descending(gram);
    if (!(ev(ev.size() - 1) > 0) || ev(0) / ev(ev.size() - 1) > 1e12)
        throw SingularGram("S S^H is numerically singular");
    const CMat ys = y * sym.adjoint();  // rows x C
    const CMat solved = gram.llt().solve(ys.adjoint());
    const double value = (ys * solved).trace().real() / sigma_r2;
    return std::max(value, 0.0);
}

std::vector<double> sample_statistics(const TrialSampler& sampler, std::size_t n_trials, std::uint64_t seed) {
    std::vector<double> out(n_trials);
    parallel_for(n_trials, [&](std::size_t t) {
        Rng rng = make_stream(seed, t);
        out[t] = sampler(rng, t);
    });
    return out;
}

double threshold_from_samples(std::vector<double> samples, double pfa) {
    const auto n = samples.size();
    if (n == 0 || !(pfa > 0) || pfa >= 1) throw InsufficientTrials("threshold needs samples and 0 < pfa < 1");
    const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * pfa - 1e-9));
    if (k < 1) throw InsufficientTrials("n_trials * pfa below one sample");
    std::sort(samples.begin(), samples.end(), std::greater<>());
    return samples[k - 1];
}

Threshold calibrate_threshold(const TrialSampler& sampler, double pfa, std::size_t n_trials, std::uint64_t seed) {
    if (static_cast<double>(n_trials) * pfa < 10.0 - 1e-9)
        throw InsufficientTrials("n_trials * pfa must be at least 10");
    Threshold th;
    th.rho = threshold_from_samples(sample_statistics(sampler, n_trials, seed), pfa);
    th.pfa_target = pfa;
    th.n_trials = n_trials;
    th.method = ThresholdMethod::empirical;
    th.seed = seed;
    return th;
}

Decision decide(double statistic, const Threshold& threshold) {
    return statistic > threshold.rho ? Decision::target_present : Decision::absent;
}

}  // namespace pisac
