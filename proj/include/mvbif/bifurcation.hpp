#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "mvbif/types.hpp"

namespace mvbif {

enum class BifurcationKind {
    unclassified,
    supercritical_pitchfork,
    subcritical_pitchfork,
    critical,
    transcritical,
    multi_mode_pitchfork,
    multi_mode_infeasible,
};
std::string to_string(BifurcationKind k);

struct BifurcationOptions {
    double coincidence_tol = 1e-9;  // |a_i - a_j| <= tol * max(a_i, a_j)
    double conditioning_tol = 1e-6; // flag when a - a_2l < tol * a
    double critical_tol = 1e-12;    // |R| below this counts as critical
    double rcond_min = 1e-12;
};

struct BifurcationReport {
    double kappa_star = 0.0;
    double level = 0.0;             // common coefficient a = 2/kappa*
    std::vector<int> modes;         // coincident set Lambda, ascending
    int periodicity = 1;            // gcd(Lambda)
    double signature = std::numeric_limits<double>::quiet_NaN();
    double curvature = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();  // kappa'(0), transcritical only
    BifurcationKind kind = BifurcationKind::unclassified;
    std::vector<double> modal_weights;  // b_r on modes, multi-mode only
    int sigma = 0;
    std::vector<int> sign_pattern;      // transcritical only
    bool ill_conditioned = false;
    std::string note;
};

std::vector<BifurcationReport> find_bifurcation_points(const PotentialSpectrum& W, double kappa_max,
                                                       const BifurcationOptions& opt = {});
BifurcationReport classify_single_mode(const PotentialSpectrum& W, int lstar,
                                       const BifurcationOptions& opt = {});
// Dispatch on |Lambda|: single mode, resonance or B-matrix path.
BifurcationReport classify(const PotentialSpectrum& W, const BifurcationReport& found,
                           const BifurcationOptions& opt = {});

struct BMatrix {
    std::vector<int> modes;
    double level = 0.0;
    std::vector<double> row_levels;  // level used in each row
    Mat B;
    std::vector<std::pair<int, int>> degenerate_entries;  // NaN entries (i, j), 0-based
};

// Exact B for a coincident set at a common level; checks conditions (i)-(iii).
BMatrix build_b_matrix(const PotentialSpectrum& W, const std::vector<int>& modes,
                       const BifurcationOptions& opt = {});
// Near-cluster surrogate: row i uses a = a_{l_i}; no coincidence or resonance checks,
// entries with vanishing denominators are NaN and listed.
BMatrix build_b_matrix_clustered(const PotentialSpectrum& W, const std::vector<int>& modes,
                                 const BifurcationOptions& opt = {});
// Which no-resonance condition fails, 0 if none.
int violated_resonance_condition(const std::vector<int>& modes);

struct ModalWeights {
    bool feasible = false;
    Vec x;                  // solution of B~ x = 1
    std::vector<double> b;  // sqrt|x_r|
    int sigma = 0;
    std::vector<int> subset;
    double level = 0.0;
    double kappa_of(double s) const { return (2.0 / level) * (1.0 + sigma * s * s / 2.0); }
};
ModalWeights multi_mode_weights(const BMatrix& B, const std::vector<int>& subset_indices,
                                const BifurcationOptions& opt = {});

struct TranscriticalBranch {
    std::array<int, 3> modes{};   // {m, l, l+m}
    std::array<int, 3> sigma{};
    double level = 0.0;
    double kappa_of(double s) const { return (2.0 / level) * (1.0 - s); }
    ModeVector direction(int N) const;
};
std::vector<TranscriticalBranch> resonance_branches(const PotentialSpectrum& W, int l, int m,
                                                    const BifurcationOptions& opt = {});

struct PeriodicityPrediction {
    int g = 1;
    std::vector<bool> forced_zero;  // index l-1
    PotentialSpectrum decimated;    // a^{(g)}_l = a_{l g}
};
PeriodicityPrediction periodicity_prediction(const PotentialSpectrum& W,
                                             const BifurcationReport& report, int N);
PotentialSpectrum decimate(const PotentialSpectrum& W, int m);

// Large-beta two-mode limits b_i^2 ~ k_i / beta, exact rationals.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};
Rational make_rational(std::int64_t num, std::int64_t den);
std::pair<Rational, Rational> modal_weight_limits(int l1, int l2);

}  // namespace mvbif
