#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pisac/linalg.hpp"
#include "pisac/random.hpp"
#include "pisac/scenario.hpp"
#include "pisac/sdp.hpp"

namespace pisac {

enum class Design {
    max_pd,               ///< alternating quadratic transform + SDR
    max_pd_sensing_only,  ///< same, no SINR constraints
    snrd_threshold,       ///< maximize target gain with an SNR_d floor
    active,               ///< maximize target gain (active-radar benchmark)
    active_sensing_only,
    comm_only,            ///< minimum-power SINR feasibility
};

std::string to_string(Design design);

struct BeamformerResult {
    CMat w;    ///< N_t x C
    CMat r_c;  ///< W W^H
    double kappa_achieved = 0.0;
    std::vector<double> sinrs;
    double power = 0.0;
    Design design = Design::comm_only;
    /// kappa after each accepted alternating iteration (max-P_d designs).
    std::vector<double> trace;
    std::optional<double> gamma_d_used;
    /// SDR optimum of the last SDP, in the design's own objective.
    double sdp_objective = 0.0;
    int iterations = 0;
    bool converged = true;
    /// Iterations whose SDP step lowered kappa (numerical error); the loop stops there.
    int rejected_steps = 0;
};

struct DesignOptions {
    double eps = 1e-4;
    int k_max = 50;
    int n_candidates = 1000;
    std::uint64_t seed = 7;
    SdpOptions sdp;
};

/// gamma_n = |h_n^H w_n|^2 / (sigma_c2 + sum_{k != n} |h_n^H w_k|^2).
std::vector<double> eval_sinr(const CMat& w, const std::vector<CVec>& h, double sigma_c2);

/// u = (I + B R B^H)^-1 B R a_t.
CVec quadratic_transform_u(const CMat& r_c, const CMat& b_matrix, const CVec& a_t);

/// a_t^H R B^H (I + B R B^H)^-1 B R a_t, i.e. kappa / (2 L mu0).
double kappa_shape(const CMat& r_c, const CMat& b_matrix, const CVec& a_t);

/// kappa of a transmit covariance on the given channels.
double kappa_of_covariance(const ChannelSet& channels, const CMat& r_c);

/// 2 Re(u^H B R a_t) - u^H (I + B R B^H) u.
double quadratic_surrogate(const CMat& r_c, const CMat& b_matrix, const CVec& a_t, const CVec& u);

/// tr(B R B^H) / M.
double snr_d_of_covariance(const ChannelSet& channels, const CMat& r_c);

/// Minimum-power W meeting every SINR target. Throws Infeasible when the
/// minimum exceeds p_t.
BeamformerResult comm_only(const ChannelSet& channels, double gamma_c, double p_t, const DesignOptions& opts = {});

/// Maximizes kappa by alternating the auxiliary-vector update and an SDP.
/// gamma_c = nullopt drops the SINR constraints (sensing-only variant,
/// initialized from an isotropic covariance).
BeamformerResult optimize_max_pd(const ChannelSet& channels, std::optional<double> gamma_c, double p_t,
                                 const DesignOptions& opts = {});

/// Maximizes a_t^H R a_t with SNR_d(R) >= gamma_d.
BeamformerResult optimize_snrd_threshold(const ChannelSet& channels, double gamma_c, double gamma_d, double p_t,
                                         const DesignOptions& opts = {});

/// Maximizes a_t^H R a_t; gamma_c = nullopt for the sensing-only variant.
BeamformerResult optimize_active(const ChannelSet& channels, std::optional<double> gamma_c, double p_t,
                                 const DesignOptions& opts = {});

/// Largest SNR_d reachable under the SINR and power constraints.
double max_achievable_snr_d(const ChannelSet& channels, double gamma_c, double p_t, const DesignOptions& opts = {});

struct GammaDPoint {
    double gamma_d = 0.0;
    std::optional<BeamformerResult> result;  ///< empty when infeasible
};

struct GammaDSweep {
    std::vector<GammaDPoint> points;
    std::size_t best = 0;  ///< index of the largest kappa
    const BeamformerResult& best_result() const { return *points[best].result; }
};

/// n_points log-spaced thresholds between 0.1x and 100x the active design's
/// SNR_d, capped at the largest achievable SNR_d.
GammaDSweep sweep_gamma_d(const ChannelSet& channels, double gamma_c, double p_t, int n_points = 20,
                          const DesignOptions& opts = {});

/// What the randomization must preserve and how it ranks candidates.
struct RandomizationProblem {
    std::optional<double> gamma_c;
    double p_t = 0.0;
    /// Power allocation LP maximizes sum_n p_n w_n^H A w_n; empty A
    /// minimizes the transmitted power instead.
    CMat objective;
    /// Extra linear floors sum_n p_n w_n^H Q w_n >= value.
    std::vector<std::pair<CMat, double>> floors;
    /// Larger is better; evaluated on repaired candidates.
    std::function<double(const CMat& w)> score;
};

/// Rank-one beamformer from SDR covariance blocks (watts). Rank-one blocks
/// give their principal eigenvectors; otherwise n_candidates Gaussian draws
/// are repaired by the power-allocation LP and the best is kept.
CMat gaussian_randomization(const std::vector<CMat>& r_blocks, const ChannelSet& channels,
                            const RandomizationProblem& problem, int n_candidates, Rng& rng);

/// Uniform rescaling of W so that tr(W W^H) = p_t (SINRs only grow).
BeamformerResult scale_to_power(const BeamformerResult& result, const ChannelSet& channels, double p_t);

/// Fills r_c, power, sinrs and kappa from w.
void finalize_result(BeamformerResult& result, const ChannelSet& channels);

}  // namespace pisac
