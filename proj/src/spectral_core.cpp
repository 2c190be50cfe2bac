#include "mvbif/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace detail {
void check_finite(const ModeVector& p, double kappa) {
    if (p.size() < 1) throw InvalidInput("mode vector is empty");
    if (!std::isfinite(kappa)) throw InvalidInput("kappa is not finite");
    if (!p.allFinite()) throw InvalidInput("mode vector has non-finite entries");
}
}  // namespace detail

namespace {

std::vector<double> cos_table(int M) {
    std::vector<double> c(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) c[static_cast<std::size_t>(j)] = std::cos(2.0 * std::numbers::pi * j / M);
    return c;
}

std::vector<double> grid(int M) {
    std::vector<double> t(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) t[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / M;
    return t;
}

// sum_l c_l cos(l theta_j) on the uniform grid
std::vector<double> cosine_sum(const Vec& c, int M) {
    const auto table = cos_table(M);
    std::vector<double> out(static_cast<std::size_t>(M), 0.0);
    const long long N = c.size();
    for (int j = 0; j < M; ++j) {
        double s = 0;
        for (long long l = 1; l <= N; ++l) s += c[l - 1] * table[static_cast<std::size_t>((l * j) % M)];
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

}  // namespace

double DensityProfile::mass() const {
    double s = 0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double DensityProfile::min_value() const {
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

int default_grid(int N) { return std::max(256, 4 * N); }

ModeVector quadratic_form(const ModeVector& u, const ModeVector& v, const PotentialSpectrum& W) {
    const int N = static_cast<int>(u.size());
    ModeVector q = ModeVector::Zero(N);
    for (int l = 1; l <= N; ++l) {
        double s = 0;
        for (int j = 1; j < l; ++j) s += j * W.a(j) * u[j - 1] * v[l - j - 1];
        for (int j = l + 1; j <= N; ++j) {
            const double c = j * W.a(j) - (j - l) * W.a(j - l);
            s += c * u[j - 1] * v[j - l - 1];
        }
        q[l - 1] = s;
    }
    return q;
}

ModeVector residual(const ModeVector& p, double kappa, const PotentialSpectrum& W) {
    detail::check_finite(p, kappa);
    const int N = static_cast<int>(p.size());
    ModeVector F = -kappa * quadratic_form(p, p, W);
    for (int l = 1; l <= N; ++l) F[l - 1] += l * (2.0 - kappa * W.a(l)) * p[l - 1];
    return F;
}

Mat jacobian(const ModeVector& p, double kappa, const PotentialSpectrum& W) {
    detail::check_finite(p, kappa);
    const int N = static_cast<int>(p.size());
    Mat S = Mat::Zero(N, N);  // h -> Q(p,h) + Q(h,p)
    for (int l = 1; l <= N; ++l) {
        for (int j = 1; j < l; ++j) {
            const double t = j * W.a(j);
            S(l - 1, l - j - 1) += t * p[j - 1];
            S(l - 1, j - 1) += t * p[l - j - 1];
        }
        for (int j = l + 1; j <= N; ++j) {
            const double c = j * W.a(j) - (j - l) * W.a(j - l);
            S(l - 1, j - l - 1) += c * p[j - 1];
            S(l - 1, j - 1) += c * p[j - l - 1];
        }
    }
    Mat J = -kappa * S;
    for (int l = 1; l <= N; ++l) J(l - 1, l - 1) += l * (2.0 - kappa * W.a(l));
    return J;
}

ModeVector second_derivative(const ModeVector& h, const ModeVector& k, double kappa,
                             const PotentialSpectrum& W) {
    detail::check_finite(h, kappa);
    detail::check_finite(k, kappa);
    if (h.size() != k.size()) throw InvalidInput("direction sizes differ");
    return -kappa * (quadratic_form(h, k, W) + quadratic_form(k, h, W));
}

ModeVector mixed_derivative(const ModeVector& p, double kappa, const PotentialSpectrum& W,
                            const ModeVector& h) {
    detail::check_finite(p, kappa);
    detail::check_finite(h, kappa);
    if (h.size() != p.size()) throw InvalidInput("direction size differs from mode vector");
    const int N = static_cast<int>(p.size());
    ModeVector out = -(quadratic_form(p, h, W) + quadratic_form(h, p, W));
    for (int l = 1; l <= N; ++l) out[l - 1] -= l * W.a(l) * h[l - 1];
    return out;
}

ModeVector dF_dkappa(const ModeVector& p, double kappa, const PotentialSpectrum& W) {
    detail::check_finite(p, kappa);
    const int N = static_cast<int>(p.size());
    ModeVector out = -quadratic_form(p, p, W);
    for (int l = 1; l <= N; ++l) out[l - 1] -= l * W.a(l) * p[l - 1];
    return out;
}

DensityProfile synthesize_density(const ModeVector& p, int M) {
    detail::check_finite(p, 1.0);
    if (M < 4 * p.size()) throw InvalidInput("grid too small for the truncation (need M >= 4N)");
    DensityProfile d;
    d.theta = grid(M);
    d.values = cosine_sum(2.0 * p, M);
    for (double& v : d.values) v += 1.0;
    return d;
}

DensityAnalysis analyze_density_checked(const DensityProfile& d, int N, double odd_tol) {
    const int M = d.size();
    if (N < 1) throw InvalidInput("truncation must be positive");
    if (M < 4 * N) throw InvalidInput("grid too small for the truncation (need M >= 4N)");
    const auto table = cos_table(M);
    DensityAnalysis out;
    out.modes = ModeVector::Zero(N);
    for (long long l = 1; l <= N; ++l) {
        double s = 0;
        for (int j = 0; j < M; ++j) s += d.values[static_cast<std::size_t>(j)] * table[static_cast<std::size_t>((l * j) % M)];
        out.modes[l - 1] = s / M;
    }
    double odd = 0, total = 0;
    for (int j = 0; j < M; ++j) {
        const double v = d.values[static_cast<std::size_t>(j)];
        const double w = d.values[static_cast<std::size_t>((M - j) % M)];
        odd += 0.25 * (v - w) * (v - w);
        total += v * v;
    }
    out.odd_energy = total > 0 ? odd / total : 0.0;
    out.symmetry_warning = out.odd_energy > odd_tol;
    return out;
}

ModeVector analyze_density(const DensityProfile& d, int N) { return analyze_density_checked(d, N).modes; }

DensityProfile fixed_point_map(const ModeVector& p, double kappa, const PotentialSpectrum& W, int M) {
    detail::check_finite(p, kappa);
    const int N = static_cast<int>(p.size());
    if (M < 4 * N) throw InvalidInput("grid too small for the truncation (need M >= 4N)");
    Vec c(N);
    for (int l = 1; l <= N; ++l) c[l - 1] = kappa * W.a(l) * p[l - 1];
    DensityProfile d;
    d.theta = grid(M);
    d.values = cosine_sum(c, M);
    const double emax = *std::max_element(d.values.begin(), d.values.end());
    double sum = 0;
    for (double& v : d.values) {
        v = std::exp(v - emax);
        sum += v;
    }
    const double mean = sum / M;
    for (double& v : d.values) v /= mean;
    d.log_Z = std::log(2.0 * std::numbers::pi * mean) + emax;
    d.Z = std::exp(d.log_Z);
    return d;
}

double self_consistency_residual(const ModeVector& p, double kappa, const PotentialSpectrum& W, int M) {
    if (M <= 0) M = default_grid(static_cast<int>(p.size()));
    const ModeVector q = analyze_density(fixed_point_map(p, kappa, W, M), static_cast<int>(p.size()));
    return (q - p).cwiseAbs().maxCoeff();
}

}  // namespace mvbif
