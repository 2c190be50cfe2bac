#include <cmath>
#include <random>

#include "doctest.h"
#include "mvbif/energy.hpp"
#include "mvbif/errors.hpp"
#include "mvbif/special_functions.hpp"
#include "oracles.hpp"

using namespace mvbif;

TEST_CASE("free energy basics") {
    auto W = transformer_spectrum(2.0, 32);
    auto f = free_energy(ModeVector::Zero(32), 1.7, W);
    CHECK(f.total == 0.0);
    CHECK(f.entropy == doctest::Approx(0).scale(1e-15));
    CHECK(f.interaction == 0.0);

    ModeVector bad = ModeVector::Zero(8);
    bad[0] = 0.9;  // 1 + 1.8 cos theta < 0 somewhere
    auto g = free_energy(bad, 1.0, kuramoto_spectrum());
    CHECK(g.infinite);
    CHECK(std::isinf(g.total));

    auto K = kuramoto_spectrum();
    auto b = newton_solve(unit_mode(64, 1) * 0.4, 2.5, K);
    CHECK(free_energy(b.p, 2.5, K).total < 0);
}

TEST_CASE("spectral and quadrature interaction energy agree") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    int tested = 0;
    while (tested < 50) {
        const int NW = 1 + static_cast<int>(rng() % 12), N = 1 + static_cast<int>(rng() % 16);
        std::vector<double> a(static_cast<std::size_t>(NW));
        for (auto& x : a) x = u(rng);
        PotentialSpectrum W(a);
        ModeVector p(N);
        for (int l = 1; l <= N; ++l) p[l - 1] = 0.4 * u(rng) / (l * l);
        const double k = 0.1 + 3 * (u(rng) + 1);
        const double spectral = 0.5 * k * interaction_energy(p, W);
        const double quad = 0.5 * k * interaction_energy_quadrature(p, W, 128);
        CHECK(std::abs(spectral - quad) < 1e-9);
        ++tested;
    }
}

TEST_CASE("minimizer") {
    SUBCASE("below the threshold the uniform state wins") {
        for (double beta : {0.5, 4.0}) {
            auto W = transformer_spectrum(beta, 48);
            auto m = minimize_energy(0.8 * 2 / W.max_coefficient(), W, 48);
            CHECK(m.trivial());
            CHECK(m.m == 0.0);
        }
    }
    SUBCASE("Kuramoto closed form") {
        const int N = 64;
        auto m = minimize_energy(2.5, kuramoto_spectrum(), N);
        CHECK_FALSE(m.best_effort);
        CHECK(m.residual_norm < 1e-9);
        auto chi = oracle::kuramoto_modes(2.5, N);
        for (int l = 1; l <= N; ++l) CHECK(m.p[l - 1] == doctest::Approx(chi[static_cast<std::size_t>(l - 1)]).epsilon(1e-8).scale(1));
        CHECK(m.m < 0);
    }
    SUBCASE("subcritical window") {
        auto W = transformer_spectrum(4.0, 48);
        const double ks = 2 / W.max_coefficient();
        auto m = minimize_energy(0.99 * ks, W, 48);
        CHECK_FALSE(m.trivial());
        CHECK(m.m < 0);
        CHECK(m.residual_norm < 1e-9);
    }
    SUBCASE("local minimizer from a far start") {
        auto K = kuramoto_spectrum();
        auto m = local_minimize(unit_mode(32, 1) * 0.05, 3.0, K);
        CHECK(m.p[0] == doctest::Approx(oracle::kuramoto_modes(3.0, 1)[0]).epsilon(1e-9));
    }
}

TEST_CASE("Lipschitz and envelope properties of m") {
    for (double beta : {0.5, 1.0, 4.0}) {
        const int N = 48;
        auto W = transformer_spectrum(beta, N);
        const double ks = 2 / W.max_coefficient();
        auto sc = scan_m(W, N, 0.6 * ks, 1.6 * ks, 0.05 * ks);
        CHECK(sc.concave);
        double wsup = 0;
        for (int l = 1; l <= W.size(); ++l) wsup += std::abs(W.a(l));
        for (std::size_t i = 0; i < sc.kappa.size(); ++i) {
            CHECK(sc.m[i] <= 0);
            if (i) {
                CHECK(std::abs(sc.m[i] - sc.m[i - 1]) <= 0.5 * wsup * (sc.kappa[i] - sc.kappa[i - 1]) + 1e-12);
                CHECK(sc.E[i] >= sc.E[i - 1] - 1e-9);
            }
        }
        // envelope identity away from the transition
        int checked = 0;
        for (std::size_t i = 0; i < sc.kappa.size(); ++i) {
            if (sc.kappa[i] < 1.1 * ks) continue;
            const double h = 1e-3, k = sc.kappa[i];
            const auto mp = minimize_energy(k + h, W, N, {}, {sc.minimizers[i]});
            const auto mm = minimize_energy(k - h, W, N, {}, {sc.minimizers[i]});
            CHECK(std::abs((mp.m - mm.m) / (2 * h) + 0.5 * sc.E[i]) < 1e-3);
            ++checked;
        }
        CHECK(checked >= 5);
    }
}

TEST_CASE("transition classification") {
    SUBCASE("Kuramoto") {
        auto t = classify_transition(kuramoto_spectrum(), 32);
        CHECK(t.kind == TransitionKind::continuous);
        CHECK(t.kappa_c == doctest::Approx(2).epsilon(1e-6));
    }
    SUBCASE("transformer beta=0.5 is continuous at kappa*") {
        auto W = transformer_spectrum(0.5, 48);
        auto t = classify_transition(W, 48);
        CHECK(t.kind == TransitionKind::continuous);
        CHECK(std::abs(t.kappa_c - kappa_star(0.5, 1)) < 1e-4);
        CHECK(t.norm_at < 1e-3);
    }
    SUBCASE("transformer beta=4 is discontinuous below kappa*") {
        auto W = transformer_spectrum(4.0, 48);
        auto t = classify_transition(W, 48);
        CHECK(t.kind == TransitionKind::discontinuous);
        CHECK(t.kappa_c < kappa_star(4.0, 1));
        CHECK(t.norm_at > 0.1);
        // m vanishes on the left and is negative on the right
        CHECK(minimize_energy(t.kappa_c * (1 - 1e-6), W, 48).m == 0.0);
        CHECK(minimize_energy(t.kappa_c * (1 + 1e-6), W, 48).m < 0);
    }
    SUBCASE("no positive coefficient") {
        CHECK_THROWS_AS(classify_transition(PotentialSpectrum({-1.0, -0.5}), 8), InvalidInput);
    }
}

TEST_CASE("kink and coexistence on a fine scan") {
    const int N = 48;
    auto W = transformer_spectrum(4.0, N);
    const double ks = 2 / W.max_coefficient();
    auto t = classify_transition(W, N);
    auto sc = scan_m(W, N, 0.94 * ks, 0.98 * ks, 1e-3 * ks);
    CHECK(sc.concave);
    REQUIRE(sc.coexistence.size() == 1);
    const auto& c = sc.coexistence[0];
    CHECK(c.kappa == doctest::Approx(t.kappa_c).epsilon(1e-8));
    CHECK(std::abs(c.E_right - c.E_left) > 1e-3);
    int first = -1, count = 0;
    for (std::size_t i = 0; i < sc.kink.size(); ++i)
        if (sc.kink[i]) count++, first = first < 0 ? static_cast<int>(i) : first;
    CHECK(count <= 2);
    CHECK(std::abs(sc.kappa[static_cast<std::size_t>(first)] - t.kappa_c) < 2e-3 * ks);

    // continuous transitions have no kink
    auto W2 = transformer_spectrum(0.5, N);
    const double k2 = 2 / W2.max_coefficient();
    auto s2 = scan_m(W2, N, 0.97 * k2, 1.03 * k2, 1e-3 * k2);
    for (bool b : s2.kink) CHECK_FALSE(b);
    CHECK(s2.coexistence.empty());
}

TEST_CASE("subcritical certificate") {
    const int N = 48;
    SUBCASE("transformer beta=4") {
        auto W = transformer_spectrum(4.0, N);
        auto rep = classify_single_mode(W, 1);
        ContinuationControls c;
        c.max_points = 40;
        auto br = continue_branch(switch_branch(rep, 0.02, W, N), unit_mode(N + 1, 1), W, c);
        auto cert = subcritical_energy_certificate(br, rep.kappa_star, W);
        CHECK(cert.direct < 0);
        CHECK(cert.integrated < 0);
        CHECK(std::abs(cert.direct - cert.integrated) < 1e-4);
        CHECK(cert.eta_kappa == br.points.back().kappa);
    }
    SUBCASE("supercritical branch refused") {
        auto K = kuramoto_spectrum();
        auto rep = classify_single_mode(K, 1);
        auto br = continue_branch(switch_branch(rep, 0.02, K, N), unit_mode(N + 1, 1), K, {});
        CHECK_THROWS_AS(subcritical_energy_certificate(br, 2.0, K), InvalidInput);
    }
    SUBCASE("resonant triple, s > 0") {
        PotentialSpectrum W({0.3, 1, 1, 0.2, 1});
        BifurcationReport f;
        f.modes = {2, 3, 5};
        auto rep = classify(W, f);
        REQUIRE(rep.kind == BifurcationKind::transcritical);
        auto seed = switch_branch(rep, 0.02, W, N);
        CHECK(seed.kappa < rep.kappa_star);
        Vec d = Vec::Zero(N + 1);
        d.head(N) = kernel_direction(rep, N);
        ContinuationControls c;
        c.max_points = 30;
        c.h_max = 0.02;
        auto br = continue_branch(seed, d, W, c);
        auto cert = subcritical_energy_certificate(br, rep.kappa_star, W);
        CHECK(cert.direct < 0);
        CHECK(std::abs(cert.direct - cert.integrated) < 1e-4);
    }
}
