#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mvbif/errors.hpp"
#include "mvbif/spectral_core.hpp"
#include "oracles.hpp"

using namespace mvbif;

namespace {

std::vector<double> random_coeffs(std::mt19937_64& g, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = u(g);
    return a;
}

Vec random_modes(std::mt19937_64& g, int n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = u(g) / (1 + i);
    return p;
}

}  // namespace

TEST_CASE("residual vanishes at the uniform state") {
    std::mt19937_64 g(3);
    for (int t = 0; t < 20; ++t) {
        const int N = 1 + t % 9;
        PotentialSpectrum W(random_coeffs(g, 1 + t % 5));
        CHECK((residual(Vec::Zero(N), 0.3 + t, W).array() == 0.0).all());
    }
}

TEST_CASE("residual small worked example") {
    PotentialSpectrum W({1.0, 0.5});
    Vec p(2);
    p << 0.1, 0.2;
    Vec F = residual(p, 1.0, W);
    CHECK(F[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(F[1] == doctest::Approx(0.59).epsilon(1e-15));
}

TEST_CASE("residual matches the brute-force double sum") {
    std::mt19937_64 g(11);
    for (int t = 0; t < 60; ++t) {
        const int N = 1 + t % 12;
        auto a = random_coeffs(g, 1 + (t * 7) % 15);
        Vec p = random_modes(g, N, 0.6);
        const double kappa = 0.2 + 0.1 * t;
        Vec F = residual(p, kappa, PotentialSpectrum(a));
        Vec R = oracle::residual(p, kappa, a);
        CHECK((F - R).cwiseAbs().maxCoeff() <= 1e-13 * (1 + R.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("non-finite input is rejected") {
    Vec p = Vec::Zero(3);
    p[1] = NAN;
    CHECK_THROWS_AS(residual(p, 1.0, kuramoto_spectrum()), InvalidInput);
    CHECK_THROWS_AS(jacobian(Vec::Zero(3), INFINITY, kuramoto_spectrum()), InvalidInput);
}

TEST_CASE("Poisson family on logsine potential") {
    const int N = 40;
    auto W = logsine_spectrum(N);
    Vec p(N);
    for (int l = 1; l <= N; ++l) p[l - 1] = std::pow(0.3, l);
    CHECK(residual(p, 2.0, W).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("jacobian at the origin is diagonal") {
    PotentialSpectrum W({1.0, 0.4, 0.1});
    Mat J = jacobian(Vec::Zero(3), 2.0, W);
    Mat D = Mat::Zero(3, 3);
    D.diagonal() << 0.0, 2.4, 5.4;
    CHECK((J - D).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("jacobian and mixed derivative match finite differences") {
    std::mt19937_64 g(5);
    for (int t = 0; t < 40; ++t) {
        const int N = 2 + t % 15;
        PotentialSpectrum W(random_coeffs(g, 1 + t % 17));
        Vec p = random_modes(g, N, 0.5);
        const double kappa = 0.5 + 0.07 * t, h = 1e-6;
        Mat J = jacobian(p, kappa, W);
        Mat FD(N, N);
        for (int j = 0; j < N; ++j) {
            Vec e = Vec::Zero(N);
            e[j] = h;
            FD.col(j) = (residual(p + e, kappa, W) - residual(p - e, kappa, W)) / (2 * h);
        }
        CHECK((J - FD).norm() <= 1e-6 * std::max(1.0, J.norm()));

        Vec dir = random_modes(g, N, 1.0);
        Vec mixed = mixed_derivative(p, kappa, W, dir);
        Vec fd = (jacobian(p, kappa + h, W) - jacobian(p, kappa - h, W)) * dir / (2 * h);
        CHECK((mixed - fd).norm() <= 1e-6 * std::max(1.0, mixed.norm()));

        Vec dk = dF_dkappa(p, kappa, W);
        Vec fdk = (residual(p, kappa + h, W) - residual(p, kappa - h, W)) / (2 * h);
        CHECK((dk - fdk).norm() <= 1e-6 * std::max(1.0, dk.norm()));
    }
}

TEST_CASE("second derivative is symmetric and matches the jacobian variation") {
    std::mt19937_64 g(8);
    for (int t = 0; t < 20; ++t) {
        const int N = 3 + t % 10;
        PotentialSpectrum W(random_coeffs(g, N));
        Vec h = random_modes(g, N, 1.0), k = random_modes(g, N, 1.0), p = random_modes(g, N, 0.3);
        const double kappa = 1.3;
        CHECK((second_derivative(h, k, kappa, W) - second_derivative(k, h, kappa, W)).cwiseAbs().maxCoeff() == 0.0);
        Vec lin = (jacobian(p + k, kappa, W) - jacobian(p, kappa, W)) * h;
        CHECK((lin - second_derivative(h, k, kappa, W)).norm() < 1e-12 * (1 + lin.norm()));
    }
}

TEST_CASE("mixed derivative at the origin and for h = 0") {
    auto W = PotentialSpectrum({0.7, 0.2, 0.4});
    for (int l = 1; l <= 3; ++l) {
        Vec m = mixed_derivative(Vec::Zero(3), 1.0, W, unit_mode(3, l));
        for (int i = 1; i <= 3; ++i) CHECK(m[i - 1] == (i == l ? -l * W.a(l) : 0.0));
    }
    CHECK(mixed_derivative(Vec::Constant(3, 0.1), 1.0, W, Vec::Zero(3)).norm() == 0.0);
}

TEST_CASE("density synthesis and analysis") {
    SUBCASE("uniform") {
        auto d = synthesize_density(Vec::Zero(8), 64);
        for (double v : d.values) CHECK(v == 1.0);
        CHECK(analyze_density(d, 8).norm() < 1e-15);
    }
    SUBCASE("Poisson kernel closed form") {
        const int N = 64;
        const double r = 0.3;
        Vec p(N);
        for (int l = 1; l <= N; ++l) p[l - 1] = std::pow(r, l);
        auto d = synthesize_density(p, 256);
        double err = 0;
        for (int j = 0; j < d.size(); ++j) {
            const double th = d.theta[static_cast<std::size_t>(j)];
            const double exact = (1 - r * r) / (1 - 2 * r * std::cos(th) + r * r);
            err = std::max(err, std::abs(exact - d.values[static_cast<std::size_t>(j)]));
        }
        CHECK(err < 1e-10);
        CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-14));

        // closed-form profile analysed back to geometric modes
        DensityProfile closed = d;
        for (int j = 0; j < d.size(); ++j) {
            const double th = d.theta[static_cast<std::size_t>(j)];
            closed.values[static_cast<std::size_t>(j)] = (1 - r * r) / (1 - 2 * r * std::cos(th) + r * r);
        }
        CHECK((analyze_density(closed, 20) - p.head(20)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("round trip") {
        std::mt19937_64 g(1);
        for (int N : {1, 5, 16, 64}) {
            Vec p = random_modes(g, N, 0.4);
            for (int M : {4 * N, 4 * N + 3, 512}) {
                if (M < 4 * N) continue;
                auto d = synthesize_density(p, M);
                CHECK((analyze_density(d, N) - p).cwiseAbs().maxCoeff() < 1e-12);
                CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-13));
                for (int j = 1; j < M; ++j)
                    CHECK(std::abs(d.values[static_cast<std::size_t>(j)] - d.values[static_cast<std::size_t>(M - j)]) < 1e-12);
            }
        }
    }
    SUBCASE("aliasing guard") {
        CHECK_THROWS_AS(synthesize_density(Vec::Zero(10), 39), InvalidInput);
    }
    SUBCASE("odd component warning") {
        auto d = synthesize_density(Vec::Zero(4), 64);
        for (int j = 0; j < 64; ++j) d.values[static_cast<std::size_t>(j)] += 0.2 * std::sin(d.theta[static_cast<std::size_t>(j)]);
        CHECK(analyze_density_checked(d, 4).symmetry_warning);
        CHECK_FALSE(analyze_density_checked(synthesize_density(Vec::Constant(4, 0.1), 64), 4).symmetry_warning);
    }
}

TEST_CASE("fixed point map") {
    SUBCASE("uniform") {
        auto d = fixed_point_map(Vec::Zero(6), 3.0, PotentialSpectrum({1.0, 0.5}), 64);
        CHECK(d.Z == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
        for (double v : d.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("positive, normalised, no overflow") {
        std::mt19937_64 g(2);
        for (int t = 0; t < 10; ++t) {
            Vec p = random_modes(g, 12, 1.0);
            auto d = fixed_point_map(p, 400.0, PotentialSpectrum(random_coeffs(g, 12)), 256);
            CHECK(d.positive());
            CHECK(std::abs(d.mass() - 1.0) < 1e-12);
            CHECK(std::isfinite(d.log_Z));
        }
    }
    SUBCASE("Kuramoto closed form is self-consistent, a random vector is not") {
        const double kappa = 2.5;
        auto m = oracle::kuramoto_modes(kappa, 32);
        Vec p = Eigen::Map<Vec>(m.data(), 32);
        CHECK(self_consistency_residual(p, kappa, kuramoto_spectrum()) < 1e-12);
        CHECK(residual(p, kappa, kuramoto_spectrum()).cwiseAbs().maxCoeff() < 1e-12);
        Vec q = p;
        q[0] += 0.05;
        CHECK(self_consistency_residual(q, kappa, kuramoto_spectrum()) > 1e-3);
    }
}
