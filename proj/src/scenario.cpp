#include "pisac/scenario.hpp"

#include <cmath>
#include <string>

#include "pisac/errors.hpp"

namespace pisac {

namespace {

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    return a;
}

double direction_angle(const Vec2& from, const Vec2& to, double broadside_rad) {
    const Vec2 d = to - from;
    return wrap_angle(std::atan2(d.y(), d.x()) - broadside_rad);
}

void require_distinct(const Vec2& a, const Vec2& b, const std::string& what) {
    if ((a - b).norm() <= 0.0) throw DegenerateGeometry(what + " coincides with another node");
}

}  // namespace

void ScenarioConfig::validate() const {
    if (sr_positions.empty()) throw ConfigError("at least one sensing receiver is required");
    if (cu_positions.empty()) throw ConfigError("at least one communication user is required");
    if (n_t < c()) throw ConfigError("n_t must be at least the number of CUs");
    if (n_t < 1 || n_1 < 1 || n_2 < 1 || n_r < 1) throw ConfigError("antenna counts must be positive");
    if (block_length < 1) throw ConfigError("block_length must be positive");
    if (!(p_t > 0) || !(sigma_r2 > 0) || !(sigma_c2 > 0) || !(rcs_variance > 0))
        throw ConfigError("powers and variances must be positive");
    if (!(carrier_wavelength > 0) || !(antenna_spacing > 0) || !(sample_rate > 0))
        throw ConfigError("wavelength, spacing and sample rate must be positive");
    if (cu_channel_variance && !(*cu_channel_variance > 0))
        throw ConfigError("cu_channel_variance must be positive");
    for (const auto& p : sr_positions) {
        require_distinct(p, bs_position, "sensing receiver");
        require_distinct(p, target_position, "sensing receiver");
    }
    for (const auto& p : cu_positions) require_distinct(p, bs_position, "communication user");
    require_distinct(target_position, bs_position, "target");
}

ScenarioConfig ScenarioConfig::multistatic_default() {
    ScenarioConfig cfg;
    cfg.sr_positions = {{141.4, 141.4}, {141.4, -141.4}, {-141.4, 141.4}, {-141.4, -141.4}};
    cfg.target_position = {0.0, -100.0};
    const double r = 100.0;
    cfg.cu_positions = {{r * std::cos(kPi / 4), r * std::sin(kPi / 4)},
                        {r * std::cos(3 * kPi / 4), r * std::sin(3 * kPi / 4)}};
    return cfg;
}

ScenarioConfig ScenarioConfig::ofdm_default() {
    ScenarioConfig cfg;
    cfg.sr_positions = {{225.0, 129.9}, {225.0, -129.9}};
    cfg.target_position = {150.0, 0.0};
    const double theta = -60.0 * kPi / 180.0;
    cfg.cu_positions = {{150.0 * std::cos(theta), 150.0 * std::sin(theta)}};
    cfg.sample_rate = 1024 * 30e3;
    cfg.block_length = 1024 + 128;
    return cfg;
}

CVec steering_vector(double angle, int n, double spacing, double wavelength) {
    CVec v(n);
    const double step = 2.0 * kPi / wavelength * spacing * std::sin(angle);
    for (int k = 0; k < n; ++k) v(k) = std::polar(1.0, step * k);
    return v;
}

double path_loss(PathKind kind, double d1, double d2, double wavelength) {
    const double four_pi = 4.0 * kPi;
    if (kind == PathKind::target) {
        if (!(d1 > 0) || !(d2 > 0)) throw DegenerateGeometry("zero-length target path");
        return wavelength * wavelength / (four_pi * four_pi * four_pi * d1 * d1 * d2 * d2);
    }
    if (!(d1 > 0)) throw DegenerateGeometry("zero-length direct path");
    return wavelength * wavelength / (four_pi * four_pi * d1 * d1);
}

namespace {

CVec orthogonal_residual(const CVec& v, const CVec& against, const char* what) {
    const double nv = v.squaredNorm();
    const double na = against.squaredNorm();
    const cplx overlap = against.dot(v);  // against^H v
    if (1.0 - std::norm(overlap) / (nv * na) < 1e-10)
        throw DegenerateGeometry(std::string(what) + ": target and direct paths are indistinguishable");
    CVec r = v - against * (overlap / na);
    return r / r.norm();
}

}  // namespace

ReceiveBeamformers receive_beamformers(const CVec& b_t1, const CVec& b_d1, const CVec& b_t2,
                                       const CVec& b_d2) {
    if (b_t1.size() != b_d1.size() || b_t2.size() != b_d2.size())
        throw DimensionMismatch("receive steering vectors of one array must have equal length");
    return {orthogonal_residual(b_t1, b_d1, "surveillance array"),
            orthogonal_residual(b_d2, b_t2, "reference array")};
}

PathGeometry compute_geometry(const ScenarioConfig& config) {
    const double broadside = config.broadside_deg * kPi / 180.0;
    PathGeometry g;
    const Vec2& bs = config.bs_position;
    const Vec2& tar = config.target_position;
    g.theta_t = direction_angle(bs, tar, broadside);
    const double d_bs_tar = (tar - bs).norm();
    const Vec2 u_bs = (tar - bs) / d_bs_tar;
    for (const Vec2& sr : config.sr_positions) {
        g.theta_d.push_back(direction_angle(bs, sr, broadside));
        g.phi_t.push_back(direction_angle(sr, tar, broadside));
        g.phi_d.push_back(direction_angle(sr, bs, broadside));
        const double d_tar_sr = (tar - sr).norm();
        g.tau_t.push_back((d_bs_tar + d_tar_sr) / kSpeedOfLight);
        g.tau_d.push_back((sr - bs).norm() / kSpeedOfLight);
        const Vec2 u_sr = (tar - sr) / d_tar_sr;
        // Bistatic range rate; closing targets get positive Doppler.
        const double range_rate = config.target_velocity.dot(u_bs + u_sr);
        g.doppler.push_back(-range_rate / config.carrier_wavelength);
    }
    return g;
}

std::vector<CVec> synth_comm_channels(Rng& rng, int c, int n_t, const std::vector<double>& variances) {
    if (static_cast<int>(variances.size()) != c) throw DimensionMismatch("one variance per CU expected");
    std::vector<CVec> out;
    out.reserve(c);
    for (int n = 0; n < c; ++n) out.push_back(complex_normal_matrix(rng, n_t, 1, variances[n]).col(0));
    return out;
}

std::vector<CVec> synth_comm_channels(Rng& rng, int c, int n_t, double variance) {
    return synth_comm_channels(rng, c, n_t, std::vector<double>(std::max(c, 0), variance));
}

double cu_channel_variance(const ScenarioConfig& config, int n) {
    if (config.cu_channel_variance) return *config.cu_channel_variance;
    const double d = (config.cu_positions.at(n) - config.bs_position).norm();
    return path_loss(PathKind::direct, d, 0.0, config.carrier_wavelength);
}

void ChannelSet::apply_beamformer(const CMat& w) {
    if (w.cols() == 0) {
        h_t_tilde = CMat::Zero(m, c);
        h_d_tilde = CMat::Zero(m, c);
        return;
    }
    if (w.rows() != n_t) throw DimensionMismatch("beamformer must have N_t rows");
    h_t_tilde.resize(m, w.cols());
    h_d_tilde.resize(m, w.cols());
    const CRow at_w = a_t.adjoint() * w;
    for (int i = 0; i < m; ++i) {
        h_t_tilde.row(i) = mu_t(i) * at_w;
        h_d_tilde.row(i) = mu_d(i) * (a_d[i].adjoint() * w);
    }
}

ChannelSet ChannelSet::with_target_scale(cplx factor) const {
    ChannelSet out = *this;
    out.alpha_t *= factor;
    out.mu_t *= factor;
    out.h_t_tilde *= factor;
    out.mu0 *= std::norm(factor);
    return out;
}

ChannelSet build_channels(const ScenarioConfig& config, cplx rcs_draw, const CMat& beamformer,
                          std::optional<std::vector<CVec>> comm_channels) {
    config.validate();
    ChannelSet ch;
    ch.m = config.m();
    ch.c = config.c();
    ch.n_t = config.n_t;
    ch.sigma_r2 = config.sigma_r2;
    ch.sigma_c2 = config.sigma_c2;
    ch.sample_rate = config.sample_rate;
    ch.block_length = config.block_length;
    ch.geometry = compute_geometry(config);

    const double lambda = config.carrier_wavelength;
    const double spacing = config.antenna_spacing;
    ch.a_t = steering_vector(ch.geometry.theta_t, config.n_t, spacing, lambda);

    ch.mu_t.resize(ch.m);
    ch.mu_d.resize(ch.m);
    ch.alpha_t.resize(ch.m);
    ch.alpha_d.resize(ch.m);
    ch.b_matrix.resize(ch.m, config.n_t);
    const double sigma_r = std::sqrt(config.sigma_r2);
    const double d_bs_tar = (config.target_position - config.bs_position).norm();
    for (int i = 0; i < ch.m; ++i) {
        const Vec2& sr = config.sr_positions[i];
        ch.a_d.push_back(steering_vector(ch.geometry.theta_d[i], config.n_t, spacing, lambda));
        ch.b_t1.push_back(steering_vector(ch.geometry.phi_t[i], config.n_1, spacing, lambda));
        ch.b_d1.push_back(steering_vector(ch.geometry.phi_d[i], config.n_1, spacing, lambda));
        ch.b_t2.push_back(steering_vector(ch.geometry.phi_t[i], config.n_2, spacing, lambda));
        ch.b_d2.push_back(steering_vector(ch.geometry.phi_d[i], config.n_2, spacing, lambda));
        const auto q = receive_beamformers(ch.b_t1[i], ch.b_d1[i], ch.b_t2[i], ch.b_d2[i]);
        ch.q_t.push_back(q.q_t);
        ch.q_d.push_back(q.q_d);

        const double pl_t = path_loss(PathKind::target, d_bs_tar, (config.target_position - sr).norm(), lambda);
        const double pl_d = path_loss(PathKind::direct, (sr - config.bs_position).norm(), 0.0, lambda);
        ch.alpha_t(i) = rcs_draw * std::sqrt(pl_t);
        ch.alpha_d(i) = std::sqrt(pl_d);
        ch.mu_t(i) = ch.alpha_t(i) * q.q_t.dot(ch.b_t1[i]);
        ch.mu_d(i) = ch.alpha_d(i) * q.q_d.dot(ch.b_d2[i]);
        ch.b_matrix.row(i) = (ch.mu_d(i) / sigma_r) * ch.a_d[i].adjoint();
    }
    ch.mu0 = ch.mu_t.squaredNorm() / config.sigma_r2;

    if (comm_channels) {
        if (static_cast<int>(comm_channels->size()) != ch.c) throw DimensionMismatch("one channel per CU expected");
        ch.comm_channels = std::move(*comm_channels);
    } else {
        Rng rng = make_stream(config.seed, kCommChannelStream);
        std::vector<double> variances;
        for (int n = 0; n < ch.c; ++n) variances.push_back(cu_channel_variance(config, n));
        ch.comm_channels = synth_comm_channels(rng, ch.c, config.n_t, variances);
    }
    ch.apply_beamformer(beamformer);
    return ch;
}

}  // namespace pisac
