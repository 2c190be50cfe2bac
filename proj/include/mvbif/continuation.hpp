#pragma once

#include <optional>
#include <string>

#include "mvbif/bifurcation.hpp"
#include "mvbif/spectral_core.hpp"

namespace mvbif {

struct NewtonOptions {
    double tol = 1e-11;       // max-abs residual
    int max_iter = 50;
    double rcond_min = 1e-14;
    int max_halvings = 12;
    // Replace an unpinned, unconverged seed by the modes of its Gibbs image before iterating.
    // This supplies the higher harmonics a bare single-mode seed lacks.
    bool gibbs_seed = true;
};

// Linear phase condition <c, p> = value; kappa becomes an unknown.
struct Pin {
    Vec c;
    double value = 0.0;
    static Pin mode(int N, int l, double value);
};

struct BranchPoint {
    ModeVector p;
    double kappa = 0.0;
    double s = 0.0;
    double residual_norm = 0.0;
    int stability_hint = 0;  // sign of the largest real Jacobian eigenvalue, 0 if unknown
    int iterations = 0;
};

BranchPoint newton_solve(const ModeVector& seed, double kappa, const PotentialSpectrum& W,
                         const NewtonOptions& opt = {}, const Pin* pin = nullptr);

enum class Provenance { trivial, pitchfork, multi_mode, transcritical, series_seeded };
std::string to_string(Provenance p);

struct ContinuationControls {
    double h_init = 0.01;
    double h_min = 1e-5;
    double h_max = 0.05;
    double kappa_min = 0.0;
    double kappa_max = 1e300;
    int max_points = 400;
    double max_arclength = 1e300;
    // stop once the branch returns to (near) the trivial solution
    double trivial_stop = 0.0;
    NewtonOptions newton{1e-11, 12, 1e-14, 6, false};
    int fast_iterations = 3;
    double grow = 1.5;
};

struct Branch {
    std::vector<BranchPoint> points;
    Provenance provenance = Provenance::trivial;
    std::vector<int> modes;
    bool failed = false;
    std::string stop_reason;
};

// direction: tangent guess in (p, kappa) of size N+1; its sign orients the branch.
Branch continue_branch(const BranchPoint& start, const Vec& direction, const PotentialSpectrum& W,
                       const ContinuationControls& ctl = {});

struct SwitchOptions {
    double eps_max = 0.4;
    double collapse_ratio = 1e-3;
    NewtonOptions newton{};
    int pattern = 0;  // transcritical sign pattern index 0..3
};
BranchPoint switch_branch(const BifurcationReport& report, double eps, const PotentialSpectrum& W,
                          int N, const SwitchOptions& opt = {});
// unit kernel direction used by switch_branch (modes only)
ModeVector kernel_direction(const BifurcationReport& report, int N, int pattern = 0);
// Amplitude used for curvature fits: p_{l*}, weighted sum for multi-mode, sigma-projection for
// transcritical.
double branch_amplitude(const BifurcationReport& report, const ModeVector& p, int pattern = 0);

// z_{lm}, l = 1..Lz (index l-1)
std::vector<double> z_recursion(const PotentialSpectrum& W, int m, double kappa, int Lz);

struct SeriesSolution {
    int m = 1;
    double kappa = 0.0;
    std::vector<double> z;
    double s_plus = 0.0;
    double s_minus = 0.0;
    ModeVector modes_plus;
    ModeVector modes_minus;
};
SeriesSolution series_density(const PotentialSpectrum& W, int m, double kappa, int N, int Lz = 12,
                              bool check_side = true);
// Amplitude from the leading-order formula; throws if the radicand is negative.
double series_amplitude(const PotentialSpectrum& W, int m, double kappa);

// Two-term exponents of the transformer density near kappa_m; returns the normalised density.
DensityProfile small_beta_density(double beta, int m, double kappa, int sign, int M);
DensityProfile large_beta_density(double beta, int m, double kappa, int sign, int M);
DensityProfile gibbs_from_exponent(const std::vector<std::pair<int, double>>& terms, int M);

struct CurvatureFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double slope = 0.0;      // kappa'(0) = c1
    double curvature = 0.0;  // kappa''(0) = 2 c2
    double rms = 0.0;
    int points = 0;
};
// Least squares kappa = c0 + c1 s + c2 s^2 over branch points with |s| <= s_fit,
// s = branch_amplitude(report, p).
CurvatureFit branch_curvature_fit(const std::vector<const Branch*>& branches,
                                  const BifurcationReport& report, double s_fit, int pattern = 0);
CurvatureFit branch_curvature_fit(const Branch& branch, const BifurcationReport& report,
                                  double s_fit, int pattern = 0);
CurvatureFit quadratic_fit(const std::vector<double>& s, const std::vector<double>& kappa);

}  // namespace mvbif
