#include "doctest.h"

#include "oracles.hpp"
#include "pisac/asymptotics.hpp"
#include "pisac/beamform.hpp"
#include "pisac/errors.hpp"

using namespace pisac;

namespace {

ChannelSet default_channels() {
    const ScenarioConfig sc = ScenarioConfig::multistatic_default();
    return build_channels(sc, 1.0, CMat(sc.n_t, 0));
}

constexpr double kPt = 0.1;

CVec complex_normal_vector(Rng& rng, int n) { return complex_normal_matrix(rng, n, 1).col(0); }

}  // namespace

TEST_CASE("SINR evaluation") {
    Rng rng = make_stream(43, 0);
    std::vector<CVec> h{complex_normal_vector(rng, 4)};
    CMat w = complex_normal_matrix(rng, 4, 1);
    CHECK(eval_sinr(w, h, 0.3)[0] == doctest::Approx(std::norm(h[0].dot(w.col(0))) / 0.3).epsilon(1e-14));

    std::vector<CVec> h2{complex_normal_vector(rng, 3), complex_normal_vector(rng, 3)};
    CMat w2 = complex_normal_matrix(rng, 3, 2);
    // w_1 orthogonal to h_1
    w2.col(0) -= h2[0] * (h2[0].dot(w2.col(0)) / h2[0].squaredNorm());
    const auto s = eval_sinr(w2, h2, 0.5);
    CHECK(s[0] == doctest::Approx(0.0).epsilon(1e-20));
    const cplx g10 = h2[1].dot(w2.col(0)), g11 = h2[1].dot(w2.col(1));
    CHECK(s[1] == doctest::Approx(std::norm(g11) / (0.5 + std::norm(g10))).epsilon(1e-12));
}

TEST_CASE("quadratic transform") {
    Rng rng = make_stream(43, 1);
    CHECK(quadratic_transform_u(CMat::Zero(4, 4), complex_normal_matrix(rng, 3, 4), complex_normal_vector(rng, 4))
              .norm() == 0.0);

    const ChannelSet ch = default_channels();
    for (int t = 0; t < 50; ++t) {
        const CMat w = complex_normal_matrix(rng, ch.n_t, ch.c) * 0.05;
        ChannelSet c = ch;
        c.apply_beamformer(w);
        const CMat r = w * w.adjoint();
        const CVec u = quadratic_transform_u(r, ch.b_matrix, ch.a_t);
        const double via_u = 2.0 * ch.block_length * ch.mu0 * quadratic_surrogate(r, ch.b_matrix, ch.a_t, u);
        const double direct = kappa_general(c.h_t_tilde, c.h_d_tilde, c.sigma_r2, c.block_length);
        CHECK(via_u == doctest::Approx(direct).epsilon(1e-9));
        CHECK(kappa_of_covariance(ch, r) == doctest::Approx(direct).epsilon(1e-9));
    }

    // M = 1: u = b R a / (1 + b R b^H)
    const CMat b = complex_normal_matrix(rng, 1, 3);
    const CVec a = complex_normal_vector(rng, 3);
    const CMat w = complex_normal_matrix(rng, 3, 2);
    const CMat r = w * w.adjoint();
    const cplx hand = (b * r * a)(0) / (1.0 + (b * r * b.adjoint())(0, 0).real());
    CHECK(std::abs(quadratic_transform_u(r, b, a)(0) - hand) < 1e-12 * std::abs(hand));
}

TEST_CASE("comm_only") {
    const ChannelSet ch = default_channels();
    SUBCASE("single user closed form") {
        ChannelSet one = ch;
        one.c = 1;
        one.comm_channels.resize(1);
        const double gain = one.comm_channels[0].squaredNorm();
        const BeamformerResult r = comm_only(one, 1.0, kPt);
        CHECK(r.power == doctest::Approx(one.sigma_c2 / gain).epsilon(1e-6));
    }
    SUBCASE("constraints tight at the minimum") {
        const BeamformerResult r = comm_only(ch, db_to_linear(12.0), kPt);
        for (double s : r.sinrs) CHECK(s == doctest::Approx(db_to_linear(12.0)).epsilon(1e-5));
    }
    SUBCASE("infeasible target") { CHECK_THROWS_AS(comm_only(ch, db_to_linear(80.0), kPt), Infeasible); }
}

TEST_CASE("max P_d design") {
    const ChannelSet ch = default_channels();
    const double g = db_to_linear(12.0);
    const BeamformerResult r = optimize_max_pd(ch, g, kPt);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] >= r.trace[k - 1] * (1.0 - 1e-8));
    CHECK(r.power <= kPt * (1.0 + 1e-9));
    for (double s : r.sinrs) CHECK(s >= g * (1.0 - 1e-6));

    const BeamformerResult comm = comm_only(ch, g, kPt);
    CHECK(r.kappa_achieved >= comm.kappa_achieved);
    const BeamformerResult sensing = optimize_max_pd(ch, std::nullopt, kPt);
    CHECK(sensing.kappa_achieved >= r.kappa_achieved * (1.0 - 1e-3));

    const BeamformerResult tiny = optimize_max_pd(ch, 1e-6, kPt);
    CHECK(tiny.kappa_achieved >= comm_only(ch, 1e-6, kPt).kappa_achieved);
}

TEST_CASE("two-antenna grid search") {
    ScenarioConfig sc = ScenarioConfig::multistatic_default();
    sc.n_t = 2;
    sc.cu_positions.resize(1);
    const ChannelSet ch = build_channels(sc, 1.0, CMat(2, 0));
    const BeamformerResult r = optimize_max_pd(ch, std::nullopt, sc.p_t);
    const double grid =
        oracle::grid_search_kappa_two_antennas(ch.mu_t, ch.b_matrix, ch.a_t, ch.sigma_r2, ch.block_length, sc.p_t, 100);
    CHECK(r.kappa_achieved >= 0.99 * grid);
}

TEST_CASE("SNR_d threshold and active designs") {
    const ChannelSet ch = default_channels();
    const double g = db_to_linear(12.0);
    const BeamformerResult active = optimize_active(ch, g, kPt);
    const BeamformerResult zero = optimize_snrd_threshold(ch, g, 0.0, kPt);
    const double gain_active = ch.a_t.dot(active.r_c * ch.a_t).real();
    CHECK(ch.a_t.dot(zero.r_c * ch.a_t).real() == doctest::Approx(gain_active).epsilon(1e-6));

    const double gd = 3.0 * snr_d_of_covariance(ch, active.r_c);
    const BeamformerResult th = optimize_snrd_threshold(ch, g, gd, kPt);
    CHECK(snr_d_of_covariance(ch, th.r_c) >= gd * (1.0 - 1e-6));
    CHECK(ch.a_t.dot(th.r_c * ch.a_t).real() <= gain_active * (1.0 + 1e-6));

    const GammaDSweep sweep = sweep_gamma_d(ch, g, kPt);
    CHECK(sweep.points.size() == 20);
    for (const auto& p : sweep.points)
        if (p.result) CHECK(sweep.best_result().kappa_achieved >= p.result->kappa_achieved);
    const BeamformerResult mid = optimize_snrd_threshold(ch, g, sweep.points[10].gamma_d, kPt);
    CHECK(sweep.best_result().kappa_achieved >= mid.kappa_achieved * (1.0 - 1e-9));

    const BeamformerResult sensing = optimize_active(ch, std::nullopt, kPt);
    CHECK(ch.a_t.dot(sensing.r_c * ch.a_t).real() == doctest::Approx(kPt * ch.n_t).epsilon(1e-6));
    CHECK(std::abs(ch.a_t.dot(sensing.w.col(0))) / (ch.a_t.norm() * sensing.w.col(0).norm()) ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Gaussian randomization") {
    const ChannelSet ch = default_channels();
    const double g = db_to_linear(6.0);
    Rng rng = make_stream(47, 0);

    SUBCASE("rank one input is returned unchanged") {
        const BeamformerResult comm = comm_only(ch, g, kPt);
        RandomizationProblem prob;
        prob.gamma_c = g;
        prob.p_t = kPt;
        prob.score = [](const CMat&) { return 0.0; };
        const CMat w = gaussian_randomization({comm.w.col(0) * comm.w.col(0).adjoint(), comm.w.col(1) * comm.w.col(1).adjoint()},
                                              ch, prob, 100, rng);
        CHECK((w * w.adjoint() - comm.r_c).norm() <= 1e-6 * comm.r_c.norm());
    }
    SUBCASE("random high-rank blocks stay feasible and near the bound") {
        double ratio = 0.0;
        const int n = 50;
        for (int t = 0; t < n; ++t) {
            ChannelSet c2 = ch;
            Rng r = make_stream(48, t);
            c2.comm_channels = synth_comm_channels(r, 2, ch.n_t, ch.comm_channels[0].squaredNorm() / ch.n_t);
            const CMat obj = ch.a_t * ch.a_t.adjoint();
            // Feasible full-rank blocks: comm solution plus isotropic power.
            const BeamformerResult comm = comm_only(c2, g, kPt / 4);
            std::vector<CMat> blocks;
            for (int k = 0; k < 2; ++k)
                blocks.push_back(comm.w.col(k) * comm.w.col(k).adjoint() * 2.0 +
                                 CMat::Identity(ch.n_t, ch.n_t) * (kPt / 4 / ch.n_t));
            RandomizationProblem prob;
            prob.gamma_c = g;
            prob.p_t = kPt;
            prob.objective = obj;
            prob.score = [&](const CMat& w) { return ch.a_t.dot(w * w.adjoint() * ch.a_t).real(); };
            const CMat w = gaussian_randomization(blocks, c2, prob, 200, r);
            CHECK((w.adjoint() * w).trace().real() <= kPt * (1.0 + 1e-9));
            for (double s : eval_sinr(w, c2.comm_channels, c2.sigma_c2)) CHECK(s >= g * (1.0 - 1e-6));
            double bound = 0.0;
            for (const auto& b : blocks) bound += ch.a_t.dot(b * ch.a_t).real();
            ratio += prob.score(w) / bound / n;
        }
        CHECK(ratio >= 0.9);
    }
}
