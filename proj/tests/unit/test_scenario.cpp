#include "doctest.h"

#include "pisac/errors.hpp"
#include "pisac/scenario.hpp"

using namespace pisac;

namespace {
const double kLambda = kSpeedOfLight / 3.5e9;
}

TEST_CASE("steering vector examples") {
    const CVec a = steering_vector(0.0, 4, kLambda / 2, kLambda);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a(i) - cplx(1.0, 0.0)) < 1e-15);

    const CVec b = steering_vector(kPi / 6, 2, kLambda / 2, kLambda);
    CHECK(std::abs(b(0) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(b(1) - cplx(0.0, 1.0)) < 1e-12);

    for (double angle : {-1.2, -0.3, 0.4, 1.5}) CHECK(steering_vector(angle, 7, kLambda / 2, kLambda).squaredNorm() ==
                                                      doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("path loss scaling") {
    const double t1 = path_loss(PathKind::target, 100.0, 150.0, kLambda);
    CHECK(path_loss(PathKind::target, 200.0, 300.0, kLambda) == doctest::Approx(t1 / 16.0).epsilon(1e-14));
    const double d1 = path_loss(PathKind::direct, 200.0, 0.0, kLambda);
    CHECK(path_loss(PathKind::direct, 400.0, 0.0, kLambda) == doctest::Approx(d1 / 4.0).epsilon(1e-14));
    // lambda^2 / ((4 pi)^2 d^2), evaluated by hand: 0.0856549^2 / (157.9137 * 40000)
    const double hand = (kLambda * kLambda) / (16.0 * kPi * kPi * 200.0 * 200.0);
    CHECK(d1 == doctest::Approx(hand).epsilon(1e-14));
    CHECK(d1 == doctest::Approx(1.16147e-9).epsilon(1e-4));
}

TEST_CASE("receive beamformers") {
    SUBCASE("orthogonal inputs keep the direction") {
        CVec bt(2), bd(2);
        bt << 1.0, 1.0;
        bd << 1.0, -1.0;
        const auto q = receive_beamformers(bt, bd, bd, bt);
        CHECK((q.q_t - bt / bt.norm()).norm() < 1e-14);
    }
    SUBCASE("parallel inputs are degenerate") {
        CVec bt(3);
        bt << 1.0, cplx(0, 1), -1.0;
        CHECK_THROWS_AS(receive_beamformers(bt, 2.0 * bt, bt, cplx(0, 1) * bt), DegenerateGeometry);
    }
    SUBCASE("Gram-Schmidt residual") {
        CVec bt(2), bd(2);
        bt << 1.0, 1.0;
        bd << 1.0, cplx(0, 1);
        // bt - (bd^H bt / bd^H bd) bd = [1,1] - (1 - j)/2 [1, j] = [(1+j)/2, (1-j)/2]
        CVec expected(2);
        expected << cplx(0.5, 0.5), cplx(0.5, -0.5);
        expected /= expected.norm();
        const auto q = receive_beamformers(bt, bd, bd, bt);
        CHECK((q.q_t - expected).norm() < 1e-14);
    }
}

TEST_CASE("build_channels") {
    const ScenarioConfig sc = ScenarioConfig::multistatic_default();
    CMat w = CMat::Identity(sc.n_t, 2) * 0.1;

    SUBCASE("zero RCS removes the target path") {
        const ChannelSet ch = build_channels(sc, 0.0, w);
        CHECK(ch.h_t_tilde.norm() == 0.0);
        CHECK(ch.mu0 == 0.0);
    }
    SUBCASE("zero beamformer") {
        const ChannelSet ch = build_channels(sc, 1.0, CMat::Zero(sc.n_t, 2));
        CHECK(ch.h_t_tilde.norm() == 0.0);
        CHECK(ch.h_d_tilde.norm() == 0.0);
    }
    SUBCASE("default geometry delays") {
        const ChannelSet ch = build_channels(sc, 1.0, w);
        REQUIRE(ch.m == 4);
        for (int i = 0; i < 4; ++i) {
            const Vec2 sr = sc.sr_positions[i];
            const double d_direct = sr.norm();
            const double d_target = sc.target_position.norm() + (sr - sc.target_position).norm();
            CHECK(ch.geometry.tau_d[i] == doctest::Approx(d_direct / kSpeedOfLight).epsilon(1e-14));
            CHECK(ch.geometry.tau_t[i] == doctest::Approx(d_target / kSpeedOfLight).epsilon(1e-14));
            CHECK(ch.geometry.tau_t[i] > ch.geometry.tau_d[i]);
        }
    }
    SUBCASE("receive beamformers null the other path") {
        const ChannelSet ch = build_channels(sc, 1.0, w);
        for (int i = 0; i < ch.m; ++i) {
            CHECK(std::abs(ch.q_t[i].dot(ch.b_d1[i])) < 1e-10);
            CHECK(std::abs(ch.q_d[i].dot(ch.b_t2[i])) < 1e-10);
        }
    }
    SUBCASE("target channel is rank one") {
        const ChannelSet ch = build_channels(sc, cplx(0.3, -1.1), w);
        Eigen::JacobiSVD<CMat> svd(ch.h_t_tilde);
        CHECK(svd.singularValues()(1) <= 1e-8 * svd.singularValues()(0));
    }
}

TEST_CASE("communication channels") {
    Rng a = make_stream(5, 1), b = make_stream(5, 1);
    const auto h1 = synth_comm_channels(a, 2, 8, 0.5);
    const auto h2 = synth_comm_channels(b, 2, 8, 0.5);
    for (int n = 0; n < 2; ++n) CHECK(h1[n] == h2[n]);
    CHECK(synth_comm_channels(a, 0, 8).empty());

    Rng r = make_stream(9, 2);
    double acc = 0.0;
    const int draws = 100000;
    for (const auto& h : synth_comm_channels(r, draws, 4, 0.5)) acc += h.squaredNorm() / 4.0;
    CHECK(acc / draws == doctest::Approx(0.5).epsilon(0.02));
}
