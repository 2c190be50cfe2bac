#include "mvbif/types.hpp"

#include <algorithm>
#include <cmath>

#include "mvbif/errors.hpp"

namespace mvbif {

PotentialSpectrum::PotentialSpectrum(std::vector<double> a, double tail, std::string label)
    : coefficients(std::move(a)), tail_bound(tail), name(std::move(label)) {
    for (double v : coefficients)
        if (!std::isfinite(v)) throw InvalidInput("potential coefficient is not finite");
    if (!std::isfinite(tail_bound) || tail_bound < 0) throw InvalidInput("bad tail bound");
}

double PotentialSpectrum::sup_weighted() const {
    double s = tail_bound;
    for (int l = 1; l <= size(); ++l) s = std::max(s, l * std::abs(a(l)));
    return s;
}

double PotentialSpectrum::max_coefficient() const {
    if (coefficients.empty()) return 0.0;
    return *std::max_element(coefficients.begin(), coefficients.end());
}

double PotentialSpectrum::sup_norm_bound() const {
    double s = 0;
    for (double v : coefficients) s += std::abs(v);
    return s;
}

double PotentialSpectrum::evaluate(double theta) const {
    double w = 0;
    for (int l = 1; l <= size(); ++l) w += a(l) * std::cos(l * theta);
    return w;
}

double PotentialSpectrum::derivative(double theta) const {
    double w = 0;
    for (int l = 1; l <= size(); ++l) w -= l * a(l) * std::sin(l * theta);
    return w;
}

PotentialSpectrum kuramoto_spectrum() { return PotentialSpectrum({1.0}, 0.0, "kuramoto"); }

PotentialSpectrum logsine_spectrum(int N) {
    if (N < 1) throw InvalidInput("logsine needs at least one coefficient");
    std::vector<double> a(static_cast<std::size_t>(N));
    for (int l = 1; l <= N; ++l) a[static_cast<std::size_t>(l - 1)] = 1.0 / l;
    // l * a_l = 1 for every l
    return PotentialSpectrum(std::move(a), 1.0, "logsine");
}

PotentialSpectrum finite_spectrum(std::vector<double> a) {
    return PotentialSpectrum(std::move(a), 0.0, "finite");
}

double weighted_dot(const ModeVector& u, const ModeVector& v) {
    double s = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double l = static_cast<double>(i + 1);
        s += (1.0 + l * l) * u[i] * v[i];
    }
    return s;
}

double weighted_norm(const ModeVector& p) { return std::sqrt(weighted_dot(p, p)); }

ModeVector unit_mode(int N, int l) {
    if (l < 1 || l > N) throw InvalidInput("mode index out of range");
    ModeVector e = ModeVector::Zero(N);
    e[l - 1] = 1.0;
    return e;
}

}  // namespace mvbif
