#include "doctest.h"

#include "oracles.hpp"
#include "pisac/detector.hpp"
#include "pisac/waveform.hpp"

using namespace pisac;

TEST_CASE("delay-Doppler operator") {
    const double fs = 30.72e6;
    CHECK((delay_doppler_operator(0, 0, 16, fs).matrix - CMat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
    const CMat d = delay_doppler_operator(3.7 / fs, 1234.5, 64, fs).matrix;
    CHECK((d * d.adjoint() - CMat::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);

    CVec e0 = CVec::Zero(8);
    e0(0) = 1.0;
    const CVec out = delay_doppler_operator(1.0 / fs, 0.0, 8, fs).matrix * e0;
    for (int k = 0; k < 8; ++k) CHECK(std::abs(out(k) - (k == 1 ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("FFT application matches the dense operator") {
    const double fs = 1e6;
    Rng rng = make_stream(3, 0);
    const CMat rows = complex_normal_matrix(rng, 3, 100);
    const auto op = delay_doppler_operator(12.3e-6, 517.0, 100, fs);
    const CMat fast = apply_delay_doppler(rows, 12.3e-6, 517.0, fs);
    CHECK((fast - rows * op.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((compensate_delay_doppler(fast, 12.3e-6, 517.0, fs) - rows).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Gaussian symbols") {
    Rng a = make_stream(11, 0), b = make_stream(11, 0);
    CHECK(gen_symbols_gaussian(a, 2, 50).data == gen_symbols_gaussian(b, 2, 50).data);

    Rng r = make_stream(11, 1);
    const int l = 10000, c = 3;
    const CMat s = gen_symbols_gaussian(r, c, l).data;
    const CMat cov = s * s.adjoint() / l;
    const double op_norm = Eigen::SelfAdjointEigenSolver<CMat>(cov - CMat::Identity(c, c)).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(op_norm <= 5.0 * std::sqrt(static_cast<double>(c) / l));

    Rng big = make_stream(11, 2);
    const CMat t = gen_symbols_gaussian(big, 1, 1000000).data;
    CHECK(t.squaredNorm() / 1e6 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("OFDM symbols") {
    double energy = 0.0;
    for (unsigned label = 0; label < 16; ++label) {
        energy += std::norm(qam16_map(label)) / 16.0;
        CHECK(qam16_demap(qam16_map(label)) == label);
    }
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-14));

    OfdmParams p;
    CHECK(p.sample_rate() == doctest::Approx(30.72e6));

    p.l_frames = 2;
    p.streams = 2;
    Rng rng = make_stream(4, 4);
    const OfdmBlock block = gen_symbols_ofdm(rng, p);
    CHECK(block.symbols.data.cols() == p.samples());
    const auto bits = demodulate_ofdm(block.symbols.data, p);
    REQUIRE(bits.size() == 2);
    CHECK(bits[0] == block.bits[0]);
    CHECK(bits[1] == block.bits[1]);
}

namespace {

ChannelSet small_scene(double rcs = 1.0) {
    ScenarioConfig sc = ScenarioConfig::multistatic_default();
    sc.block_length = 64;
    CMat w = CMat::Zero(sc.n_t, sc.c());
    Rng rng = make_stream(2, 2);
    w = complex_normal_matrix(rng, sc.n_t, sc.c()) * std::sqrt(sc.p_t / (sc.n_t * sc.c()));
    return build_channels(sc, rcs, w);
}

CMat current_w(const ChannelSet&) {
    ScenarioConfig sc = ScenarioConfig::multistatic_default();
    Rng rng = make_stream(2, 2);
    return complex_normal_matrix(rng, sc.n_t, sc.c()) * std::sqrt(sc.p_t / (sc.n_t * sc.c()));
}

}  // namespace

TEST_CASE("physical chain with zero noise reproduces the signal term") {
    ChannelSet ch = small_scene();
    const CMat w = current_w(ch);
    ch.sigma_r2 = 0.0;
    Rng rng = make_stream(8, 0);
    const SymbolBlock s = gen_symbols_gaussian(rng, ch.c, 64);
    const Observation raw = synth_received(ch, w, s, Hypothesis::h1, rng);
    const Observation y = frontend_process(raw, ch, true_target_tuples(ch));
    const CMat expected_t = ch.h_t_tilde * s.data;
    const CMat expected_d = ch.h_d_tilde * s.data;
    const double scale = expected_t.cwiseAbs().maxCoeff();
    CHECK((y.target_block() - expected_t).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((y.direct_block() - expected_d).cwiseAbs().maxCoeff() <= 1e-9 * expected_d.cwiseAbs().maxCoeff());

    const Observation h0 = frontend_process(synth_received(ch, w, s, Hypothesis::h0, rng), ch, true_target_tuples(ch));
    CHECK(h0.target_block().norm() <= 1e-9 * scale);
}

TEST_CASE("zero beamformer gives pure noise") {
    ChannelSet ch = small_scene();
    Rng rng = make_stream(8, 1);
    const SymbolBlock s = gen_symbols_gaussian(rng, ch.c, 64);
    const Observation raw = synth_received(ch, CMat::Zero(ch.n_t, ch.c), s, Hypothesis::h1, rng);
    double power = 0.0;
    Eigen::Index count = 0;
    for (const auto& blk : raw.per_sr_raw) {
        power += blk.surveillance.squaredNorm() + blk.reference.squaredNorm();
        count += blk.surveillance.size() + blk.reference.size();
    }
    CHECK(power / count == doctest::Approx(ch.sigma_r2).epsilon(0.1));
}

TEST_CASE("H0 target rows are noise after the front end") {
    ChannelSet ch = small_scene();
    const CMat w = current_w(ch);
    double power = 0.0;
    Eigen::Index count = 0;
    for (int t = 0; t < 40; ++t) {
        Rng rng = make_stream(21, t);
        const SymbolBlock s = gen_symbols_gaussian(rng, ch.c, 64);
        const Observation y = frontend_process(synth_received(ch, w, s, Hypothesis::h0, rng), ch, true_target_tuples(ch));
        power += y.target_block().squaredNorm();
        count += y.target_block().size();
    }
    CHECK(power / count == doctest::Approx(ch.sigma_r2).epsilon(0.02));
}

TEST_CASE("equivalent model covariance") {
    ChannelSet ch = small_scene(5e3);
    Rng rng = make_stream(31, 0);
    const int l = 100000;
    const SymbolBlock s = gen_symbols_gaussian(rng, ch.c, l);
    const Observation y = synth_equivalent(ch, s, Hypothesis::h1, rng);
    CMat h(2 * ch.m, ch.c);
    h << ch.h_t_tilde, ch.h_d_tilde;
    const CMat model = h * h.adjoint() + ch.sigma_r2 * CMat::Identity(2 * ch.m, 2 * ch.m);
    const CMat sample = y.y * y.y.adjoint() / l;
    CHECK((sample - model).norm() / model.norm() < 0.03);

    const SymbolBlock s0 = gen_symbols_gaussian(rng, ch.c, 20000);
    const Observation y0 = synth_equivalent(ch, s0, Hypothesis::h0, rng);
    const CMat cross = y0.target_block() * y0.direct_block().adjoint() / 20000.0;
    CHECK(cross.norm() < 0.05 * std::sqrt(ch.sigma_r2 * (ch.sigma_r2 + ch.h_d_tilde.squaredNorm())) * ch.m);
}

TEST_CASE("equivalent model matches the physical chain") {
    ChannelSet ch = small_scene(3e3);
    const CMat w = current_w(ch);
    std::vector<double> eq, phys;
    for (int t = 0; t < 400; ++t) {
        Rng r1 = make_stream(41, t), r2 = make_stream(42, t);
        const SymbolBlock s1 = gen_symbols_gaussian(r1, ch.c, 64);
        eq.push_back(glrt_statistic(synth_equivalent(ch, s1, Hypothesis::h1, r1), ch.sigma_r2, ch.c).statistic);
        const SymbolBlock s2 = gen_symbols_gaussian(r2, ch.c, 64);
        phys.push_back(glrt_statistic(frontend_process(synth_received(ch, w, s2, Hypothesis::h1, r2), ch, true_target_tuples(ch)),
                                      ch.sigma_r2, ch.c)
                           .statistic);
    }
    CHECK(oracle::ks_two_sample_pvalue(eq, phys) > 0.01);
}
