#pragma once

#include <limits>
#include <string>

#include "mvbif/continuation.hpp"

namespace mvbif {

struct FreeEnergy {
    double total = 0.0;
    double entropy = 0.0;
    double interaction = 0.0;  // (kappa/2) sum a_l p_l^2
    bool infinite = false;
};

FreeEnergy free_energy(const ModeVector& p, double kappa, const PotentialSpectrum& W, int M = 0);
double interaction_energy(const ModeVector& p, const PotentialSpectrum& W);  // sum a_l p_l^2
// (1/4pi^2) double integral of W(theta - phi) rho(theta) rho(phi), by quadrature
double interaction_energy_quadrature(const ModeVector& p, const PotentialSpectrum& W, int M);

struct MinimizeControls {
    int grid = 0;                 // 0 means default_grid(N)
    int descent_iterations = 400;
    double descent_tol = 1e-9;
    int seed_modes = 4;           // leading positive modes used for seeds
    std::vector<double> seed_amplitudes{0.15, 0.45, 0.8};
    NewtonOptions polish{1e-12, 30, 1e-14, 12, false};
    double trivial_norm = 1e-7;
};

struct Minimizer {
    ModeVector p;
    double m = 0.0;
    double E = 0.0;
    double entropy = 0.0;
    double residual_norm = 0.0;
    bool best_effort = false;
    bool trivial() const { return p.size() == 0 || p.norm() == 0.0; }
};

// Local minimisation of the free energy from one start, parameterised through the Gibbs map.
Minimizer local_minimize(const ModeVector& start, double kappa, const PotentialSpectrum& W,
                         const MinimizeControls& ctl = {});
Minimizer minimize_energy(double kappa, const PotentialSpectrum& W, int N,
                          const MinimizeControls& ctl = {},
                          const std::vector<ModeVector>& extra_starts = {});

struct EnergyControls {
    double m_tol = 1e-10;
    double jump_tol = 1e-3;
    double kink_tol = 10.0;
    double concavity_tol = 1e-9;
    MinimizeControls minimize{};
};

struct Coexistence {
    double kappa = 0.0;
    ModeVector left, right;
    double E_left = 0.0, E_right = 0.0;
};

struct EnergyScan {
    std::vector<double> kappa, m, E, entropy, norm;
    std::vector<ModeVector> minimizers;
    std::vector<bool> kink;
    std::vector<Coexistence> coexistence;
    double max_second_difference = 0.0;
    bool concave = true;
};

EnergyScan scan_m(const PotentialSpectrum& W, int N, double kappa_lo, double kappa_hi, double step,
                  const EnergyControls& ctl = {});

enum class TransitionKind { none, continuous, discontinuous };
std::string to_string(TransitionKind k);

struct Transition {
    double kappa_c = std::numeric_limits<double>::quiet_NaN();
    TransitionKind kind = TransitionKind::none;
    double norm_at = 0.0;      // extrapolated minimizer norm at kappa_c+
    double kappa_star = 0.0;   // 2 / max a
    ModeVector minimizer;      // non-trivial minimizer at kappa_c+
};

Transition classify_transition(const PotentialSpectrum& W, int N, const EnergyControls& ctl = {},
                               double kappa_lo = 0.0, double kappa_hi = 0.0);

struct EnergyCertificate {
    double direct = 0.0;
    double integrated = 0.0;
    double eta_kappa = 0.0;
};
// F(p_eta, kappa*) - F(0, kappa*) along a subcritical branch, both directly and through the
// identity d/ds F(p_s, kappa*) = (kappa_s - kappa*) sum a_l p_l p_l'. Uses every branch point
// with |kappa - kappa*| > 0 up to the last one.
EnergyCertificate subcritical_energy_certificate(const Branch& branch, double kappa_star,
                                                 const PotentialSpectrum& W, int M = 0);

}  // namespace mvbif
