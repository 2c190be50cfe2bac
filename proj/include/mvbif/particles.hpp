#pragma once

#include <cstdint>

#include "mvbif/types.hpp"

namespace mvbif {

struct ParticleState {
    std::vector<double> angles;
    double t = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step_index = 0;
};

ParticleState make_uniform_state(int n, std::uint64_t seed);

// drift_i = (kappa/N) sum_j W'(theta_i - theta_j), via per-mode sums. Modes used: l <= W.size().
std::vector<double> drift(const ParticleState& s, double kappa, const PotentialSpectrum& W,
                          int threads = 1);
std::vector<double> drift_naive(const ParticleState& s, double kappa, const PotentialSpectrum& W);

// One Euler-Maruyama step; noise amplitude sqrt(2 dt) unless noise = false.
void step(ParticleState& s, double dt, double kappa, const PotentialSpectrum& W, bool noise = true,
          int threads = 1);

// Standard normal from the counter (seed, step, particle).
double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t index);

struct EmpiricalModes {
    ModeVector modes;     // (1/N) sum cos l theta
    ModeVector magnitude; // |(1/N) sum e^{i l theta}|
    double standard_error = 0.0;
};
EmpiricalModes empirical_modes(const std::vector<double>& angles, int n_modes);

struct SimulationControls {
    int particles = 4000;
    double t_final = 200.0;
    double dt = 1e-3;
    double burn_in = 50.0;
    double sample_every = 0.1;
    int batches = 20;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct TrajectorySample {
    double t, p1, p2, energy;
};

struct StationaryReport {
    double solver_p1 = 0.0;
    double mean_p1 = 0.0;
    double standard_error = 0.0;
    double z_score = 0.0;
    int samples = 0;
    std::vector<TrajectorySample> trajectory;
};

StationaryReport stationary_compare(double kappa, const PotentialSpectrum& W,
                                    const ModeVector& solver_solution, const SimulationControls& ctl);

}  // namespace mvbif
