#include "doctest.h"

#include <numeric>

#include "oracles.hpp"
#include "pisac/asymptotics.hpp"
#include "pisac/detector.hpp"

using namespace pisac;

TEST_CASE("GLRT from eigenvalues") {
    RVec psi(2), phi(1);
    psi << 0.9, 0.4;
    phi << 0.7;
    const GlrtResult none = glrt_from_eigenvalues(psi, phi, 1, 100);
    CHECK(none.statistic == 0.0);
    CHECK(none.epsilon0 == 0);
    CHECK(none.zeta0 == 0);

    psi << 4.0, 2.0;
    phi << 3.0;
    CHECK(glrt_from_eigenvalues(psi, phi, 1, 100).statistic ==
          doctest::Approx(100.0 * (1.0 - std::log(4.0 / 3.0))).epsilon(1e-12));
    CHECK(glrt_from_eigenvalues(psi, phi, 1, 100).statistic == doctest::Approx(71.232).epsilon(1e-5));
}

TEST_CASE("GLRT matches numerical likelihood maximization") {
    Rng rng = make_stream(17, 0);
    for (int trial = 0; trial < 3; ++trial) {
        const CMat h = complex_normal_matrix(rng, 2, 1) * 2.0;
        const CMat y = h * complex_normal_matrix(rng, 1, 60) + complex_normal_matrix(rng, 2, 60);
        const double closed = glrt_statistic(y, 1.0, 1).statistic;
        CHECK(closed == doctest::Approx(oracle::glrt_brute_force(y, 1.0, 1, rng)).epsilon(1e-6));
    }
}

TEST_CASE("GLRT invariances") {
    Rng rng = make_stream(17, 1);
    const int m = 3, c = 2, l = 40;
    const CMat h = complex_normal_matrix(rng, 2 * m, c);
    const CMat y = h * complex_normal_matrix(rng, c, l) + complex_normal_matrix(rng, 2 * m, l);
    const double base = glrt_statistic(y, 1.0, c).statistic;
    CHECK(base >= -1e-9);

    const CMat u = Eigen::HouseholderQR<CMat>(complex_normal_matrix(rng, l, l)).householderQ();
    CHECK(glrt_statistic(CMat(y * u), 1.0, c).statistic == doctest::Approx(base).epsilon(1e-10));

    // Same SR permutation on both blocks.
    const std::vector<int> perm{2, 0, 1};
    CMat p(2 * m, l);
    for (int i = 0; i < m; ++i) {
        p.row(i) = y.row(perm[i]);
        p.row(m + i) = y.row(m + perm[i]);
    }
    CHECK(glrt_statistic(p, 1.0, c).statistic == doctest::Approx(base).epsilon(1e-10));

    for (int t = 0; t < 50; ++t) {
        const CMat n = complex_normal_matrix(rng, 2 * m, 20);
        CHECK(glrt_statistic(n, 1.0, c).statistic >= -1e-9);
    }
}

TEST_CASE("GLRT grows with the target path") {
    Rng rng = make_stream(17, 2);
    const CMat hd = complex_normal_matrix(rng, 2, 1) * 3.0;
    const CMat ht_shape = complex_normal_matrix(rng, 2, 1);
    double previous = -1.0;
    for (double gain : {0.0, 0.1, 0.2, 0.4}) {
        double mean = 0.0;
        for (int t = 0; t < 1000; ++t) {
            Rng r = make_stream(99, t);
            const SymbolBlock s = gen_symbols_gaussian(r, 1, 100);
            mean += glrt_statistic(synth_equivalent(gain * ht_shape, hd, 1.0, s, Hypothesis::h1, r), 1.0, 1).statistic;
        }
        mean /= 1000.0;
        CHECK(mean > previous);
        previous = mean;
    }
}

TEST_CASE("active statistic") {
    Rng rng = make_stream(18, 0);
    const SymbolBlock s = gen_symbols_gaussian(rng, 2, 30);
    CHECK(active_statistic(CMat::Zero(3, 30), s, 1.0) == 0.0);
    const CMat h = complex_normal_matrix(rng, 3, 2);
    const CMat y = h * s.data;
    CHECK(active_statistic(y, s, 0.5) == doctest::Approx((y * y.adjoint()).trace().real() / 0.5).epsilon(1e-12));

    double mean = 0.0;
    for (int t = 0; t < 10000; ++t) {
        Rng r = make_stream(18, t + 1);
        const SymbolBlock st = gen_symbols_gaussian(r, 2, 30);
        mean += 2.0 * active_statistic(complex_normal_matrix(r, 3, 30, 0.5), st, 0.5) / 10000.0;
    }
    CHECK(mean == doctest::Approx(12.0).epsilon(0.05));
}

TEST_CASE("threshold calibration") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    const double rho = threshold_from_samples(v, 0.05);
    CHECK(rho == 96.0);
    CHECK(std::count_if(v.begin(), v.end(), [&](double x) { return x > rho; }) == 4);

    const TrialSampler sampler = [](Rng& rng, std::size_t) {
        const SymbolBlock s = gen_symbols_gaussian(rng, 1, 2000);
        CMat hd(2, 1);
        hd << 2.0, cplx(1.0, 1.0);
        return glrt_statistic(synth_equivalent(CMat::Zero(2, 1), hd, 1.0, s, Hypothesis::h0, rng), 1.0, 1).statistic;
    };
    const Threshold a = calibrate_threshold(sampler, 0.05, 2000, 5);
    const Threshold b = calibrate_threshold(sampler, 0.05, 2000, 5);
    CHECK(a.rho == b.rho);
    CHECK(a.rho == doctest::Approx(asymptotic_threshold(0.05, 4)).epsilon(0.10));
}

TEST_CASE("decision is strict") {
    Threshold t;
    t.rho = 5.0;
    CHECK(decide(6.0, t) == Decision::target_present);
    CHECK(decide(5.0, t) == Decision::absent);
    CHECK(decide(4.999, t) == Decision::absent);
}
