#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pisac/linalg.hpp"
#include "pisac/random.hpp"

namespace pisac {

/// Geometry, array sizes, powers and noise levels of one experiment.
/// Angles are measured from the array broadside direction; every array in
/// the scene is a ULA whose broadside points along `broadside_deg` (global
/// frame, degrees from +x).
struct ScenarioConfig {
    Vec2 bs_position{0.0, 0.0};
    std::vector<Vec2> sr_positions;
    Vec2 target_position{0.0, -100.0};
    std::vector<Vec2> cu_positions;

    int n_t = 16;  ///< BS transmit antennas
    int n_1 = 14;  ///< surveillance array
    int n_2 = 2;   ///< reference array
    int n_r = 14;  ///< receive antennas of the active-detection benchmark

    double carrier_wavelength = kSpeedOfLight / 3.5e9;
    double antenna_spacing = 0.5 * (kSpeedOfLight / 3.5e9);
    double p_t = 0.1;                  ///< W
    double sigma_r2 = 3.981071705534972e-12;  ///< -114 dBW
    double sigma_c2 = 3.981071705534972e-12;  ///< -114 dBW
    double rcs_variance = 1.0;         ///< m^2
    int block_length = 500;            ///< L
    double sample_rate = 30.72e6;      ///< Hz
    Vec2 target_velocity{0.0, 0.0};    ///< m/s
    std::uint64_t seed = 1;

    /// Per-element variance of the Rayleigh CU channels. When unset, each CU
    /// gets the free-space loss at its distance from the BS.
    std::optional<double> cu_channel_variance;

    double broadside_deg = 0.0;

    int m() const { return static_cast<int>(sr_positions.size()); }
    int c() const { return static_cast<int>(cu_positions.size()); }

    /// Throws ConfigError / DegenerateGeometry on invalid settings.
    void validate() const;

    /// M = 4 SRs on the 200 m circle, target at (0, -100), two CUs at 100 m.
    static ScenarioConfig multistatic_default();
    /// Two SRs, one CU at 150 m / -60 deg, target at (150, 0); OFDM numerology.
    static ScenarioConfig ofdm_default();
};

/// Angles (rad), delays (s) and Dopplers (Hz) of the scene.
struct PathGeometry {
    double theta_t = 0.0;
    std::vector<double> theta_d;
    std::vector<double> phi_t;
    std::vector<double> phi_d;
    std::vector<double> tau_t;
    std::vector<double> tau_d;
    std::vector<double> doppler;
};

/// Everything the detector and the beamforming designs need to know about
/// the propagation channels. Quantities that depend on the transmit
/// beamformer (h_t_tilde, h_d_tilde) are refreshed by apply_beamformer().
struct ChannelSet {
    int m = 0;
    int c = 0;
    int n_t = 0;
    double sigma_r2 = 0.0;
    double sigma_c2 = 0.0;
    double sample_rate = 0.0;
    int block_length = 0;

    CMat h_t_tilde;  ///< M x C
    CMat h_d_tilde;  ///< M x C
    CMat b_matrix;   ///< M x N_t, rows mu_d,i a_d,i^H / sigma_r
    double mu0 = 0.0;
    CVec mu_t;
    CVec mu_d;
    CVec alpha_t;
    CVec alpha_d;
    std::vector<CVec> comm_channels;

    CVec a_t;
    std::vector<CVec> a_d;
    std::vector<CVec> b_t1, b_d1, b_t2, b_d2;
    std::vector<CVec> q_t, q_d;

    PathGeometry geometry;

    /// Recomputes h_t_tilde / h_d_tilde for the given N_t x C beamformer.
    void apply_beamformer(const CMat& w);

    /// Copy with every target-path gain multiplied by `factor`
    /// (alpha_t, mu_t, h_t_tilde, mu0).
    ChannelSet with_target_scale(cplx factor) const;
};

enum class PathKind { target, direct };

CVec steering_vector(double angle, int n, double spacing, double wavelength);

/// Free-space power gain. For `target`, d1 is transmitter-target and d2 is
/// target-receiver; for `direct`, d1 is transmitter-receiver and d2 unused.
double path_loss(PathKind kind, double d1, double d2, double wavelength);

struct ReceiveBeamformers {
    CVec q_t;
    CVec q_d;
};

/// Unit-norm projections: q_t of b_t1 orthogonal to b_d1, q_d of b_d2
/// orthogonal to b_t2.
ReceiveBeamformers receive_beamformers(const CVec& b_t1, const CVec& b_d1, const CVec& b_t2,
                                       const CVec& b_d2);

/// Angles, delays, Dopplers of the configured scene.
PathGeometry compute_geometry(const ScenarioConfig& config);

/// Rayleigh CU channels, CN(0, variance_n) per element.
std::vector<CVec> synth_comm_channels(Rng& rng, int c, int n_t, const std::vector<double>& variances);
std::vector<CVec> synth_comm_channels(Rng& rng, int c, int n_t, double variance = 1.0);

/// Channel variance used for CU n when the config does not override it.
double cu_channel_variance(const ScenarioConfig& config, int n);

/// Builds the channel set. CU channels are drawn from the stream
/// (config.seed, kCommChannelStream) unless given explicitly. `beamformer`
/// may be empty (0 columns) when no design exists yet.
ChannelSet build_channels(const ScenarioConfig& config, cplx rcs_draw, const CMat& beamformer,
                          std::optional<std::vector<CVec>> comm_channels = std::nullopt);

inline constexpr std::uint64_t kCommChannelStream = 0xC0FFEE;

}  // namespace pisac
