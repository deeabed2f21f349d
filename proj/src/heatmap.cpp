#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>

#include "pisac/errors.hpp"
#include "pisac/harness.hpp"
#include "pisac/parallel.hpp"

namespace pisac {

HeatmapGrid make_heatmap_grid(const HeatmapSpec& spec, const Vec2& target) {
    HeatmapGrid g;
    g.nx = spec.nx;
    g.ny = spec.ny;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const Vec2 p = spec.center + spec.spacing * Vec2(i - spec.nx / 2, j - spec.ny / 2);
            const double d = (p - target).norm();
            if (d < best) {
                best = d;
                g.target_cell = g.cells.size();
            }
            g.cells.push_back(p);
        }
    return g;
}

namespace {

std::vector<cplx> spectrum(const CRow& row) {
    thread_local Eigen::FFT<double> fft;
    std::vector<cplx> in(row.data(), row.data() + row.size()), out;
    fft.fwd(out, in);
    return out;
}

}  // namespace

// Compensating a row for delay tau multiplies its DFT bin k by
// exp(j 2 pi k tau f_s / L), so every entry of Y Y^H is a phase-weighted sum
// of precomputed cross spectra.
std::vector<double> heatmap_statistics(const Observation& raw, const ChannelSet& channels,
                                       const ScenarioConfig& scenario, const HeatmapGrid& grid) {
    const int m = channels.m;
    if (static_cast<int>(raw.per_sr_raw.size()) != m) throw DimensionMismatch("raw blocks missing");
    const Eigen::Index l = raw.per_sr_raw.front().surveillance.cols();
    const double fs = channels.sample_rate;
    const auto direct = true_direct_tuples(channels);

    std::vector<std::vector<cplx>> ft(m), fd(m);
    CMat dd(m, m);
    RVec tt(m);
    CMat direct_rows(m, l);
    for (int i = 0; i < m; ++i) {
        CRow s = channels.q_t[i].adjoint() * raw.per_sr_raw[i].surveillance;
        const double f = channels.geometry.doppler[i];
        if (f != 0.0)
            for (Eigen::Index n = 0; n < l; ++n) s(n) *= std::polar(1.0, -2.0 * kPi * f * n / fs);
        ft[i] = spectrum(s);
        tt(i) = s.squaredNorm();
        const CRow d = channels.q_d[i].adjoint() * raw.per_sr_raw[i].reference;
        direct_rows.row(i) = compensate_delay_doppler(d, direct[i].tau, direct[i].doppler, fs);
        fd[i] = spectrum(direct_rows.row(i));
    }
    dd = direct_rows * direct_rows.adjoint();

    // Cross spectra scaled by 1/L (Parseval with the unnormalized DFT).
    const double inv_l = 1.0 / static_cast<double>(l);
    std::vector<std::vector<cplx>> ptt(m * m), ptd(m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            ptd[a * m + b].resize(l);
            for (Eigen::Index k = 0; k < l; ++k) ptd[a * m + b][k] = ft[a][k] * std::conj(fd[b][k]) * inv_l;
            if (b > a) {
                ptt[a * m + b].resize(l);
                for (Eigen::Index k = 0; k < l; ++k) ptt[a * m + b][k] = ft[a][k] * std::conj(ft[b][k]) * inv_l;
            }
        }

    auto weighted = [l](const std::vector<cplx>& p, double theta) {
        const cplx step = std::polar(1.0, theta);
        cplx w(1.0, 0.0), acc(0.0, 0.0);
        for (Eigen::Index k = 0; k < l; ++k) {
            acc += p[k] * w;
            w *= step;
        }
        return acc;
    };

    std::vector<double> out(grid.cells.size());
    parallel_for(grid.cells.size(), [&](std::size_t cell) {
        const Vec2& p = grid.cells[cell];
        std::vector<double> theta(m);
        for (int i = 0; i < m; ++i) {
            const double tau =
                ((p - scenario.bs_position).norm() + (p - scenario.sr_positions[i]).norm()) / kSpeedOfLight;
            theta[i] = 2.0 * kPi * tau * fs * inv_l;
        }
        CMat gram(2 * m, 2 * m);
        gram.bottomRightCorner(m, m) = dd;
        for (int a = 0; a < m; ++a) {
            gram(a, a) = tt(a);
            for (int b = a + 1; b < m; ++b) {
                gram(a, b) = weighted(ptt[a * m + b], theta[a] - theta[b]);
                gram(b, a) = std::conj(gram(a, b));
            }
            for (int b = 0; b < m; ++b) {
                gram(a, m + b) = weighted(ptd[a * m + b], theta[a]);
                gram(m + b, a) = std::conj(gram(a, m + b));
            }
        }
        out[cell] = glrt_from_covariance(gram * inv_l, channels.sigma_r2, channels.c, static_cast<int>(l)).statistic;
    });
    return out;
}

namespace {

SymbolBlock heatmap_symbols(const ExperimentConfig& config, int c, Rng& rng) {
    if (!config.heatmap.ofdm) return gen_symbols_gaussian(rng, c, config.scenario.block_length);
    OfdmParams params;
    params.streams = c;
    params.delta_f = config.scenario.sample_rate / params.n_sc;
    params.l_frames = config.scenario.block_length / (params.n_sc + params.cyclic_prefix());
    params.requested_l = config.scenario.block_length;
    return gen_symbols_ofdm(rng, params).symbols;
}

}  // namespace

HeatmapRun run_heatmap_trials(const ExperimentConfig& config, Hypothesis hypothesis) {
    config.validate();
    const ScenarioConfig& sc = config.scenario;
    const ChannelSet base = build_channels(sc, cplx(1.0, 0.0), CMat(sc.n_t, 0));
    const SchemeDesign design =
        design_scheme(config.heatmap.scheme, base, db_to_linear(config.gamma_c_db), sc.p_t, config);
    const HeatmapGrid grid = make_heatmap_grid(config.heatmap, sc.target_position);
    const double magnitude = std::sqrt(db_to_linear(config.heatmap.rcs_dbsm));

    HeatmapRun run;
    run.n_trials = config.heatmap.n_trials;
    std::vector<double> first;
    std::size_t hits = 0;
    const std::uint64_t seed = stream_seed(config.seed, 4);
    for (std::size_t trial = 0; trial < run.n_trials; ++trial) {
        Rng rng = make_stream(seed, trial);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        const ChannelSet ch = base.with_target_scale(std::polar(magnitude, phase(rng)));
        const SymbolBlock s = heatmap_symbols(config, ch.c, rng);
        const Observation raw = synth_received(ch, design.beamformer.w, s, hypothesis, rng);
        const auto stats = heatmap_statistics(raw, ch, sc, grid);
        const auto peak = std::max_element(stats.begin(), stats.end()) - stats.begin();
        if (static_cast<std::size_t>(peak) == grid.target_cell) ++hits;
        if (trial == 0) first = stats;
    }
    run.peak_hit_rate = static_cast<double>(hits) / static_cast<double>(run.n_trials);

    CurveTable& t = run.table;
    t.name = "heatmap";
    t.columns = {"x", "y", "statistic"};
    for (std::size_t i = 0; i < grid.cells.size(); ++i) t.add_row({grid.cells[i].x(), grid.cells[i].y(), first[i]});
    stamp(t, config);
    t.metadata["peak_hit_rate"] = run.peak_hit_rate;
    t.metadata["n_trials"] = run.n_trials;
    t.metadata["target_cell"] = grid.target_cell;
    t.metadata["hypothesis"] = hypothesis == Hypothesis::h1 ? "h1" : "h0";
    return run;
}

CurveTable run_heatmap(const ExperimentConfig& config) { return run_heatmap_trials(config).table; }

}  // namespace pisac
