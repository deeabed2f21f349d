#include "doctest.h"

#include "oracles.hpp"
#include "pisac/asymptotics.hpp"
#include "pisac/detector.hpp"

using namespace pisac;

TEST_CASE("kappa examples") {
    Rng rng = make_stream(23, 0);
    const CMat hd = complex_normal_matrix(rng, 3, 2);
    CHECK(kappa_general(CMat::Zero(3, 2), hd, 1.0, 500) == 0.0);
    const CMat ht = complex_normal_matrix(rng, 3, 2);
    CHECK(kappa_general(ht, hd, 1.0, 1000) == doctest::Approx(2.0 * kappa_general(ht, hd, 1.0, 500)).epsilon(1e-13));

    // M = C = 1 with SNR_t = 0.01 and SNR_d = 10.
    CMat t1(1, 1), d1(1, 1);
    t1 << std::sqrt(0.01);
    d1 << std::sqrt(10.0);
    CHECK(kappa_general(t1, d1, 1.0, 500) == doctest::Approx(2.0 * 500 * 0.01 * 10.0 / 11.0).epsilon(1e-12));
    CHECK(kappa_general(t1, d1, 1.0, 500) == doctest::Approx(9.0909).epsilon(1e-4));
}

TEST_CASE("kappa identities") {
    Rng rng = make_stream(23, 1);
    for (int t = 0; t < 100; ++t) {
        const int m = 1 + t % 8, c = 1 + t % 4;
        const CMat ht = complex_normal_matrix(rng, m, c), hd = complex_normal_matrix(rng, m, c) * 2.0;
        const double kg = kappa_general(ht, hd, 0.7, 300);
        const AsymptoticPerf ke = kappa_eigform(ht, hd, 0.7, 300);
        CHECK(ke.nu == 2 * m * c);
        CHECK(std::abs(kg - ke.kappa) <= 1e-10 * kg);
        CHECK(std::abs(kg - oracle::kappa_dense(ht, hd, 0.7, 300)) <= 1e-10 * kg);
        CHECK(kg <= 2.0 * 300 * ht.squaredNorm() / 0.7);

        const CMat u = Eigen::HouseholderQR<CMat>(complex_normal_matrix(rng, c, c)).householderQ();
        CHECK(kappa_general(ht * u, hd * u, 0.7, 300) == doctest::Approx(kg).epsilon(1e-10));
    }
    const CMat ht = complex_normal_matrix(rng, 4, 2), hd = complex_normal_matrix(rng, 4, 2);
    CHECK(kappa_eigform(ht, 1e6 * hd, 1.0, 500).kappa == doctest::Approx(2.0 * 500 * ht.squaredNorm()).epsilon(1e-6));

    const CMat h1 = complex_normal_matrix(rng, 4, 1), d1 = complex_normal_matrix(rng, 4, 1);
    const AsymptoticPerf single = kappa_eigform(h1, d1, 1.0, 500);
    REQUIRE(single.eigen_decomp);
    CHECK(single.eigen_decomp->sigma_bar.size() == 1);
    CHECK(single.kappa ==
          doctest::Approx(kappa_single_cu(500, 4, snr_t(h1, 1.0, 4), snr_d(d1, 1.0, 4))).epsilon(1e-12));
}

TEST_CASE("closed forms and SNRs") {
    CHECK(kappa_single_cu(500, 4, 0.0, 1.0) == 0.0);
    CHECK(kappa_single_cu(500, 4, 0.01, 1.0) == doctest::Approx(32.0).epsilon(1e-14));
    CHECK(kappa_single_cu(500, 4, 0.01, 1e9) == doctest::Approx(kappa_active(500, 4, 0.01)).epsilon(1e-8));

    Rng rng = make_stream(23, 2);
    CHECK(snr_t(CMat::Zero(4, 2), 1.0, 4) == 0.0);
    const CMat h = complex_normal_matrix(rng, 4, 2);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) sum += std::norm(h(i, j));
    CHECK(snr_t(h, 2.0, 4) == doctest::Approx(sum / 8.0).epsilon(1e-12));
    CHECK(snr_d(3.0 * h, 2.0, 4) == doctest::Approx(9.0 * sum / 8.0).epsilon(1e-12));
}

TEST_CASE("false-alarm and detection probabilities") {
    CHECK(asymptotic_pfa(0.0, 8) == doctest::Approx(1.0));
    for (double rho : {0.1, 1.0, 5.0, 20.0}) CHECK(asymptotic_pfa(rho, 2) == doctest::Approx(std::exp(-rho)).epsilon(1e-12));

    const double rho = asymptotic_threshold(1e-3, 16);
    CHECK(2.0 * rho == doctest::Approx(39.25).epsilon(1e-3));
    CHECK(2.0 * rho == doctest::Approx(oracle::chi2_upper_quantile(1e-3, 16)).epsilon(1e-10));

    CHECK(asymptotic_pd(0.0, 8, 10.0) == doctest::Approx(1.0));
    CHECK(asymptotic_pd(7.0, 8, 0.0) == doctest::Approx(asymptotic_pfa(7.0, 8)).epsilon(1e-10));

    double prev = 0.0;
    for (double kappa = 0.0; kappa <= 100.0; kappa += 2.5) {
        const double pd = asymptotic_pd(10.0, 8, kappa);
        CHECK(pd >= prev);
        prev = pd;
    }
    prev = 1.0;
    for (double r = 0.0; r <= 40.0; r += 1.0) {
        const double pd = asymptotic_pd(r, 8, 20.0), pfa = asymptotic_pfa(r, 8);
        CHECK(pd <= prev);
        prev = pd;
        CHECK(pfa <= asymptotic_pfa(r - 0.5, 8) + 1e-15);
    }
}

TEST_CASE("special functions") {
    CHECK(gamma_tail_regularized(3.5, 0.0) == 1.0);
    CHECK(marcum_q(2.0, 1.5, 0.0) == 1.0);
    for (double x : {1e-3, 0.5, 2.0, 10.0, 40.0}) CHECK(std::abs(gamma_tail_regularized(1.0, x) - std::exp(-x)) < 1e-12);
    for (double b : {1e-3, 0.5, 2.0, 5.0}) CHECK(std::abs(marcum_q(1.0, 0.0, b) - std::exp(-b * b / 2)) < 1e-12);
    CHECK(std::abs(marcum_q(1.0, 1.0, 1.0) - oracle::marcum_q_quadrature(1, 1.0, 1.0)) < 1e-9);
    CHECK(std::abs(gamma_tail_regularized(8.0, 19.626) - oracle::gamma_tail_quadrature(8.0, 19.626)) < 1e-9);
    CHECK(gamma_head_regularized(4.0, 3.0) + gamma_tail_regularized(4.0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Wilks moments") {
    Rng setup = make_stream(29, 0);
    const CMat hd = complex_normal_matrix(setup, 2, 1) * 3.0;
    const CMat shape = complex_normal_matrix(setup, 2, 1);
    const CMat ht = shape * std::sqrt(12.0 / kappa_general(shape, hd, 1.0, 2000));
    double m0 = 0.0, m1 = 0.0;
    const int n = 1500;
    for (int t = 0; t < n; ++t) {
        Rng r = make_stream(30, t);
        const SymbolBlock s = gen_symbols_gaussian(r, 1, 2000);
        m0 += 2.0 * glrt_statistic(synth_equivalent(CMat::Zero(2, 1), hd, 1.0, s, Hypothesis::h0, r), 1.0, 1).statistic / n;
        m1 += 2.0 * glrt_statistic(synth_equivalent(ht, hd, 1.0, s, Hypothesis::h1, r), 1.0, 1).statistic / n;
    }
    CHECK(m0 == doctest::Approx(4.0).epsilon(0.08));
    CHECK(m1 == doctest::Approx(16.0).epsilon(0.05));
}
