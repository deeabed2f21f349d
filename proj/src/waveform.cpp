#include "pisac/waveform.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "pisac/errors.hpp"

namespace pisac {

namespace {

Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

// Pi^H K(sign * tau f_s / L) Pi / L applied to a column vector: frequency bin n
// picks up exp(j 2 pi n * sign * tau * f_s / L).
void delay_in_place(std::vector<cplx>& x, double tau, double f_s, double sign) {
    const std::size_t l = x.size();
    std::vector<cplx> spectrum;
    fft_engine().fwd(spectrum, x);
    const double step = sign * 2.0 * kPi * tau * f_s / static_cast<double>(l);
    for (std::size_t n = 0; n < l; ++n) spectrum[n] *= std::polar(1.0, step * static_cast<double>(n));
    fft_engine().inv(x, spectrum);
}

void doppler_in_place(std::vector<cplx>& x, double doppler, double f_s, double sign) {
    if (doppler == 0.0) return;
    const double step = sign * 2.0 * kPi * doppler / f_s;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, step * static_cast<double>(n));
}

}  // namespace

DelayDopplerOp delay_doppler_operator(double tau, double doppler, int l, double f_s) {
    if (l < 1 || !(f_s > 0)) throw ConfigError("delay_doppler_operator needs l >= 1 and f_s > 0");
    CMat dft(l, l);
    for (int m = 0; m < l; ++m)
        for (int n = 0; n < l; ++n)
            dft(m, n) = std::polar(1.0, -2.0 * kPi * static_cast<double>((static_cast<long long>(m) * n) % l) / l);
    CVec k_delay(l), k_doppler(l);
    for (int n = 0; n < l; ++n) {
        k_delay(n) = std::polar(1.0, 2.0 * kPi * n * (-tau * f_s / l));
        k_doppler(n) = std::polar(1.0, 2.0 * kPi * n * (doppler / f_s));
    }
    CMat inner = k_delay.asDiagonal() * dft;
    CMat d = (k_doppler.asDiagonal() * (dft.adjoint() * inner)) / static_cast<double>(l);
    return {std::move(d), tau, doppler};
}

CMat apply_delay_doppler(const CMat& rows, double tau, double doppler, double f_s) {
    CMat out(rows.rows(), rows.cols());
    std::vector<cplx> buf(rows.cols());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[c] = rows(r, c);
        delay_in_place(buf, tau, f_s, -1.0);
        doppler_in_place(buf, doppler, f_s, +1.0);
        for (Eigen::Index c = 0; c < rows.cols(); ++c) out(r, c) = buf[c];
    }
    return out;
}

CMat compensate_delay_doppler(const CMat& rows, double tau, double doppler, double f_s) {
    CMat out(rows.rows(), rows.cols());
    std::vector<cplx> buf(rows.cols());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[c] = rows(r, c);
        doppler_in_place(buf, doppler, f_s, -1.0);
        delay_in_place(buf, tau, f_s, +1.0);
        for (Eigen::Index c = 0; c < rows.cols(); ++c) out(r, c) = buf[c];
    }
    return out;
}

SymbolBlock gen_symbols_gaussian(Rng& rng, int c, int l) {
    return {complex_normal_matrix(rng, c, l, 1.0), Modulation::gaussian};
}

namespace {

// Gray-coded 2-bit PAM level: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
double pam4_level(unsigned two_bits) {
    static constexpr double levels[4] = {-3.0, -1.0, 3.0, 1.0};
    return levels[two_bits & 3u];
}

unsigned pam4_label(double v) {
    if (v < -2.0) return 0b00;
    if (v < 0.0) return 0b01;
    if (v < 2.0) return 0b11;
    return 0b10;
}

}  // namespace

cplx qam16_map(unsigned label) {
    static const double scale = 1.0 / std::sqrt(10.0);
    return {pam4_level(label >> 2) * scale, pam4_level(label) * scale};
}

unsigned qam16_demap(cplx sample) {
    const double s = std::sqrt(10.0);
    return (pam4_label(sample.real() * s) << 2) | pam4_label(sample.imag() * s);
}

OfdmBlock gen_symbols_ofdm(Rng& rng, const OfdmParams& params) {
    const int n = params.n_sc;
    if (n < 1 || (n & (n - 1)) != 0) throw ConfigError("n_sc must be a power of two");
    if (params.l_frames < 1 || params.streams < 1) throw ConfigError("l_frames and streams must be positive");
    const int cp = params.cyclic_prefix();
    if (cp < 0 || cp > n) throw ConfigError("cyclic prefix must lie in [0, n_sc]");
    const int frame_len = n + cp;
    if (params.requested_l && *params.requested_l != params.samples())
        throw ConfigError("requested block length does not equal l_frames * (n_sc + cp)");

    OfdmBlock out;
    out.sample_rate = params.sample_rate();
    out.symbols.modulation = Modulation::qam16_ofdm;
    out.symbols.data.resize(params.streams, params.samples());
    out.bits.assign(params.streams, {});
    std::bernoulli_distribution coin(0.5);
    const double amplitude = std::sqrt(static_cast<double>(n));
    std::vector<cplx> freq(n), time;
    for (int s = 0; s < params.streams; ++s) {
        auto& bits = out.bits[s];
        bits.reserve(static_cast<std::size_t>(4) * n * params.l_frames);
        for (int f = 0; f < params.l_frames; ++f) {
            for (int k = 0; k < n; ++k) {
                unsigned label = 0;
                for (int b = 0; b < 4; ++b) {
                    const std::uint8_t bit = coin(rng) ? 1 : 0;
                    bits.push_back(bit);
                    label = (label << 1) | bit;
                }
                freq[k] = qam16_map(label);
            }
            // Unitary inverse DFT keeps unit average power per sample.
            fft_engine().inv(time, freq);
            const int base = f * frame_len;
            for (int i = 0; i < cp; ++i) out.symbols.data(s, base + i) = time[n - cp + i] * amplitude;
            for (int i = 0; i < n; ++i) out.symbols.data(s, base + cp + i) = time[i] * amplitude;
        }
    }
    return out;
}

std::vector<std::vector<std::uint8_t>> demodulate_ofdm(const CMat& samples, const OfdmParams& params) {
    const int n = params.n_sc;
    const int cp = params.cyclic_prefix();
    const int frame_len = n + cp;
    if (samples.cols() != static_cast<Eigen::Index>(params.l_frames) * frame_len)
        throw DimensionMismatch("sample count does not match OFDM framing");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::vector<std::uint8_t>> bits(samples.rows());
    std::vector<cplx> time(n), freq;
    for (Eigen::Index s = 0; s < samples.rows(); ++s) {
        for (int f = 0; f < params.l_frames; ++f) {
            for (int i = 0; i < n; ++i) time[i] = samples(s, f * frame_len + cp + i);
            fft_engine().fwd(freq, time);
            for (int k = 0; k < n; ++k) {
                const unsigned label = qam16_demap(freq[k] * scale);
                for (int b = 3; b >= 0; --b) bits[s].push_back(static_cast<std::uint8_t>((label >> b) & 1u));
            }
        }
    }
    return bits;
}

Observation synth_received(const ChannelSet& channels, const CMat& beamformer, const SymbolBlock& symbols,
                           Hypothesis hypothesis, Rng& rng) {
    if (beamformer.rows() != channels.n_t || beamformer.cols() != symbols.data.rows())
        throw DimensionMismatch("beamformer must be N_t x C with C = symbol rows");
    const double f_s = channels.sample_rate;
    const Eigen::Index l = symbols.data.cols();
    const CMat x = beamformer * symbols.data;  // N_t x L transmitted samples
    const CRow target_row = channels.a_t.adjoint() * x;

    Observation obs;
    obs.per_sr_raw.reserve(channels.m);
    for (int i = 0; i < channels.m; ++i) {
        const auto& g = channels.geometry;
        const CRow direct_row = channels.a_d[i].adjoint() * x;
        const CRow direct_delayed = apply_delay_doppler(direct_row, g.tau_d[i], 0.0, f_s);
        RawSrBlock raw;
        const Eigen::Index n1 = channels.b_t1[i].size();
        const Eigen::Index n2 = channels.b_t2[i].size();
        raw.surveillance = complex_normal_matrix(rng, n1, l, channels.sigma_r2);
        raw.reference = complex_normal_matrix(rng, n2, l, channels.sigma_r2);
        raw.surveillance += channels.alpha_d(i) * channels.b_d1[i] * direct_delayed;
        raw.reference += channels.alpha_d(i) * channels.b_d2[i] * direct_delayed;
        if (hypothesis == Hypothesis::h1) {
            const CRow target_delayed = apply_delay_doppler(target_row, g.tau_t[i], g.doppler[i], f_s);
            raw.surveillance += channels.alpha_t(i) * channels.b_t1[i] * target_delayed;
            raw.reference += channels.alpha_t(i) * channels.b_t2[i] * target_delayed;
        }
        obs.per_sr_raw.push_back(std::move(raw));
    }
    return obs;
}

std::vector<DelayDoppler> true_target_tuples(const ChannelSet& channels) {
    std::vector<DelayDoppler> out;
    for (int i = 0; i < channels.m; ++i) out.push_back({channels.geometry.tau_t[i], channels.geometry.doppler[i]});
    return out;
}

std::vector<DelayDoppler> true_direct_tuples(const ChannelSet& channels) {
    std::vector<DelayDoppler> out;
    for (int i = 0; i < channels.m; ++i) out.push_back({channels.geometry.tau_d[i], 0.0});
    return out;
}

Observation frontend_process(const Observation& raw, const ChannelSet& channels,
                             const std::vector<DelayDoppler>& target_hypothesis,
                             std::optional<std::vector<DelayDoppler>> direct) {
    const int m = channels.m;
    if (static_cast<int>(raw.per_sr_raw.size()) != m) throw DimensionMismatch("per-SR raw blocks missing");
    if (static_cast<int>(target_hypothesis.size()) != m) throw DimensionMismatch("one target tuple per SR expected");
    const auto direct_tuples = direct ? *direct : true_direct_tuples(channels);
    if (static_cast<int>(direct_tuples.size()) != m) throw DimensionMismatch("one direct tuple per SR expected");

    const Eigen::Index l = raw.per_sr_raw.front().surveillance.cols();
    Observation out;
    out.y.resize(2 * m, l);
    for (int i = 0; i < m; ++i) {
        const auto& blk = raw.per_sr_raw[i];
        if (blk.surveillance.rows() != channels.q_t[i].size() || blk.reference.rows() != channels.q_d[i].size() ||
            blk.surveillance.cols() != l || blk.reference.cols() != l)
            throw DimensionMismatch("raw block shape does not match the array sizes");
        const CRow t = channels.q_t[i].adjoint() * blk.surveillance;
        const CRow d = channels.q_d[i].adjoint() * blk.reference;
        const double f_s = channels.sample_rate;
        out.y.row(i) = compensate_delay_doppler(t, target_hypothesis[i].tau, target_hypothesis[i].doppler, f_s);
        out.y.row(m + i) = compensate_delay_doppler(d, direct_tuples[i].tau, direct_tuples[i].doppler, f_s);
    }
    return out;
}

Observation synth_equivalent(const CMat& h_t, const CMat& h_d, double sigma_r2, const SymbolBlock& symbols,
                             Hypothesis hypothesis, Rng& rng) {
    if (h_t.rows() != h_d.rows() || h_t.cols() != h_d.cols() || h_t.cols() != symbols.data.rows())
        throw DimensionMismatch("equivalent channels must both be M x C with C = symbol rows");
    const Eigen::Index m = h_t.rows();
    const Eigen::Index l = symbols.data.cols();
    Observation obs;
    obs.y = complex_normal_matrix(rng, 2 * m, l, sigma_r2);
    if (hypothesis == Hypothesis::h1) obs.y.topRows(m) += h_t * symbols.data;
    obs.y.bottomRows(m) += h_d * symbols.data;
    return obs;
}

Observation synth_equivalent(const ChannelSet& channels, const SymbolBlock& symbols, Hypothesis hypothesis,
                             Rng& rng) {
    return synth_equivalent(channels.h_t_tilde, channels.h_d_tilde, channels.sigma_r2, symbols, hypothesis, rng);
}

}  // namespace pisac
