#include "mvbif/special_functions.hpp"

#include <algorithm>
#include <cmath>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace {

void check_args(int l, double x) {
    if (l < 0 || l > kMaxBesselOrder) throw InvalidInput("Bessel order outside [0, 256]");
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("Bessel argument must be finite and >= 0");
}

double switch_point(int l) { return std::max(30.0, 2.0 * l); }

// e^{-x} sum_k (x/2)^{l+2k} / (k! (l+k)!)
double scaled_series(int l, double x) {
    double t = std::exp(-x);
    for (int i = 1; i <= l; ++i) t *= 0.5 * x / i;
    if (t == 0.0) return 0.0;
    const double q = 0.25 * x * x;
    double sum = t;
    for (int k = 0; k < 100000; ++k) {
        t *= q / ((k + 1.0) * (l + k + 1.0));
        sum += t;
        if (t <= 1e-17 * sum && k + 1 > 0.5 * x) break;
    }
    return sum;
}

// Ratios I_{k+1}/I_k from the backward continued fraction, and e^{-x} I_0 from the
// normalisation e^{-x}(I_0 + 2 sum_k I_k) = 1.
std::vector<double> scaled_by_ratios(int lmax, double x) {
    const int M = lmax + 100 + static_cast<int>(12.0 * std::sqrt(x));
    std::vector<double> r(static_cast<std::size_t>(M) + 1, 0.0);
    for (int k = M - 1; k >= 0; --k)
        r[static_cast<std::size_t>(k)] = x / (2.0 * (k + 1) + x * r[static_cast<std::size_t>(k) + 1]);
    std::vector<double> prod(static_cast<std::size_t>(M) + 1);
    prod[0] = 1.0;
    double norm = 1.0;
    for (int k = 1; k <= M; ++k) {
        prod[static_cast<std::size_t>(k)] = prod[static_cast<std::size_t>(k) - 1] * r[static_cast<std::size_t>(k) - 1];
        norm += 2.0 * prod[static_cast<std::size_t>(k)];
    }
    const double i0 = 1.0 / norm;
    std::vector<double> out(static_cast<std::size_t>(lmax) + 1);
    for (int k = 0; k <= lmax; ++k) out[static_cast<std::size_t>(k)] = i0 * prod[static_cast<std::size_t>(k)];
    return out;
}

}  // namespace

double bessel_i_scaled(int l, double x) {
    check_args(l, x);
    if (x == 0.0) return l == 0 ? 1.0 : 0.0;
    if (x <= switch_point(l)) return scaled_series(l, x);
    return scaled_by_ratios(l, x)[static_cast<std::size_t>(l)];
}

std::vector<double> bessel_i_scaled_all(int lmax, double x) {
    check_args(lmax, x);
    std::vector<double> out(static_cast<std::size_t>(lmax) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    std::vector<double> asym;
    if (x > switch_point(0)) asym = scaled_by_ratios(lmax, x);
    for (int l = 0; l <= lmax; ++l)
        out[static_cast<std::size_t>(l)] =
            x <= switch_point(l) ? scaled_series(l, x) : asym[static_cast<std::size_t>(l)];
    return out;
}

double bessel_i(int l, double x) {
    check_args(l, x);
    if (x > 700.0) throw RangeError("I_l(x) overflows for x > 700; use bessel_i_scaled");
    return std::exp(x) * bessel_i_scaled(l, x);
}

PotentialSpectrum transformer_spectrum(double beta, int NW) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be positive");
    if (NW < 1 || NW >= kMaxBesselOrder) throw InvalidInput("transformer coefficient count outside [1, 255]");
    if (beta > 700.0) throw RangeError("transformer coefficients overflow for beta > 700");
    const int tail_end = std::min(kMaxBesselOrder, std::max(NW + 1, static_cast<int>(std::ceil(std::sqrt(beta))) + 3));
    const auto I = bessel_i_scaled_all(tail_end, beta);
    const double scale = 2.0 * std::exp(beta) / beta;
    std::vector<double> a(static_cast<std::size_t>(NW));
    for (int l = 1; l <= NW; ++l) a[static_cast<std::size_t>(l - 1)] = scale * I[static_cast<std::size_t>(l)];
    double tail = 0.0;
    for (int l = NW + 1; l <= tail_end; ++l) tail = std::max(tail, l * scale * I[static_cast<std::size_t>(l)]);
    return PotentialSpectrum(std::move(a), tail, "transformer");
}

double kappa_star(double beta, int l) {
    if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
    if (l < 1) throw InvalidInput("mode must be >= 1");
    // beta / I_l = beta e^{-beta} / (e^{-beta} I_l)
    return beta * std::exp(-beta) / bessel_i_scaled(l, beta);
}

double signature_ratio_transformer(double beta, int l) {
    if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
    if (l < 1 || 2 * l > kMaxBesselOrder) throw InvalidInput("mode outside [1, 128]");
    const double il = bessel_i_scaled(l, beta);
    const double i2l = bessel_i_scaled(2 * l, beta);
    return (il - 2.0 * i2l) / (il - i2l);
}

double bessel_ratio_21(double beta) {
    if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
    return bessel_i_scaled(2, beta) / bessel_i_scaled(1, beta);
}

double solve_beta_threshold(double target) {
    double lo = 1e-8, hi = 1e4;
    if (!(target > bessel_ratio_21(lo) && target < bessel_ratio_21(hi)))
        throw NoRoot("target outside the range of I_2/I_1 on [1e-8, 1e4]");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (bessel_ratio_21(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ClusteringDiagnostic clustering_diagnostic(double beta, int L) {
    if (L < 2) throw InvalidInput("clustering diagnostic needs L >= 2");
    const PotentialSpectrum W = transformer_spectrum(beta, L);
    ClusteringDiagnostic d;
    d.beta = beta;
    d.L = L;
    d.exact = Mat::Zero(L, L);
    d.predicted = Mat::Zero(L, L);
    for (int i = 1; i <= L; ++i)
        for (int j = i + 1; j <= L; ++j) {
            d.exact(i - 1, j - 1) = (W.a(i) - W.a(j)) / W.a(i);
            d.predicted(i - 1, j - 1) = (j * j - i * i) / (2.0 * beta);
        }
    return d;
}

}  // namespace mvbif
