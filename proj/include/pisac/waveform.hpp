#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pisac/linalg.hpp"
#include "pisac/random.hpp"
#include "pisac/scenario.hpp"

namespace pisac {

enum class Modulation { gaussian, qam16_ofdm };

/// C x L transmitted symbols, unit expected power per entry.
struct SymbolBlock {
    CMat data;
    Modulation modulation = Modulation::gaussian;
};

/// Dense L x L delay-Doppler operator (unitary).
struct DelayDopplerOp {
    CMat matrix;
    double tau = 0.0;
    double doppler = 0.0;
};

struct DelayDoppler {
    double tau = 0.0;
    double doppler = 0.0;
};

/// Pre-combining samples of one SR: surveillance (N_1 x L) and reference
/// (N_2 x L) arrays.
struct RawSrBlock {
    CMat surveillance;
    CMat reference;
};

/// Aggregated 2M x L observation: target rows first, then direct rows.
struct Observation {
    CMat y;
    std::vector<RawSrBlock> per_sr_raw;

    int m() const { return static_cast<int>(y.rows() / 2); }
    auto target_block() const { return y.topRows(y.rows() / 2); }
    auto direct_block() const { return y.bottomRows(y.rows() / 2); }
};

enum class Hypothesis { h0, h1 };

/// D = (1/L) K(f/f_s) Pi^H K(-tau f_s / L) Pi with the unnormalized DFT Pi.
DelayDopplerOp delay_doppler_operator(double tau, double doppler, int l, double f_s);

/// rows * D^T (each row delayed and Doppler shifted), via two FFTs per row.
CMat apply_delay_doppler(const CMat& rows, double tau, double doppler, double f_s);
/// rows * conj(D): undoes apply_delay_doppler for the same (tau, doppler).
CMat compensate_delay_doppler(const CMat& rows, double tau, double doppler, double f_s);

SymbolBlock gen_symbols_gaussian(Rng& rng, int c, int l);

/// Unit-energy 16-QAM point for a 4-bit label (Gray mapped per axis).
cplx qam16_map(unsigned label);
/// Nearest-point label for a (possibly noisy) sample.
unsigned qam16_demap(cplx sample);

struct OfdmParams {
    int n_sc = 1024;
    double delta_f = 30e3;
    int l_frames = 1;
    int cp_len = -1;  ///< -1 selects n_sc / 8
    int streams = 1;  ///< C independent OFDM streams
    std::optional<int> requested_l;

    int cyclic_prefix() const { return cp_len < 0 ? n_sc / 8 : cp_len; }
    int samples() const { return l_frames * (n_sc + cyclic_prefix()); }
    double sample_rate() const { return n_sc * delta_f; }
};

struct OfdmBlock {
    SymbolBlock symbols;
    /// bits[stream] holds 4 * n_sc * l_frames bits, frame-major.
    std::vector<std::vector<std::uint8_t>> bits;
    double sample_rate = 0.0;
};

OfdmBlock gen_symbols_ofdm(Rng& rng, const OfdmParams& params);

/// Strips the cyclic prefix, takes the DFT and slices every subcarrier.
std::vector<std::vector<std::uint8_t>> demodulate_ofdm(const CMat& samples, const OfdmParams& params);

/// Physical two-array reception at every SR; per_sr_raw is populated and y
/// left empty.
Observation synth_received(const ChannelSet& channels, const CMat& beamformer, const SymbolBlock& symbols,
                           Hypothesis hypothesis, Rng& rng);

/// Receive combining, delay-Doppler compensation and aggregation. Direct
/// paths are compensated with the known direct delays (zero Doppler) unless
/// `direct` is given.
Observation frontend_process(const Observation& raw, const ChannelSet& channels,
                             const std::vector<DelayDoppler>& target_hypothesis,
                             std::optional<std::vector<DelayDoppler>> direct = std::nullopt);

/// Matched compensation tuples (true delays and Dopplers) of the scene.
std::vector<DelayDoppler> true_target_tuples(const ChannelSet& channels);
std::vector<DelayDoppler> true_direct_tuples(const ChannelSet& channels);

/// Equivalent model: Y = [H_t; H_d] S + Z with H_t zeroed under H0.
Observation synth_equivalent(const ChannelSet& channels, const SymbolBlock& symbols, Hypothesis hypothesis,
                             Rng& rng);
/// Same model from explicit equivalent channels.
Observation synth_equivalent(const CMat& h_t, const CMat& h_d, double sigma_r2, const SymbolBlock& symbols,
                             Hypothesis hypothesis, Rng& rng);

}  // namespace pisac
