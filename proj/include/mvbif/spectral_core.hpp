#pragma once

#include "mvbif/types.hpp"

namespace mvbif {

struct DensityProfile {
    std::vector<double> theta;
    std::vector<double> values;
    double Z = 0.0;      // normalisation of the Gibbs map, 0 when synthesised
    double log_Z = 0.0;

    int size() const { return static_cast<int>(values.size()); }
    double mass() const;  // (1/2pi) * trapezoid integral
    double min_value() const;
    bool positive() const { return min_value() > 0.0; }
};

int default_grid(int N);  // max(256, 4N)

// Q_l(u,v) = sum_{j<l} j a_j u_j v_{l-j} + sum_{l<j<=N} (j a_j - (j-l) a_{j-l}) u_j v_{j-l}
ModeVector quadratic_form(const ModeVector& u, const ModeVector& v, const PotentialSpectrum& W);

ModeVector residual(const ModeVector& p, double kappa, const PotentialSpectrum& W);
Mat jacobian(const ModeVector& p, double kappa, const PotentialSpectrum& W);
ModeVector second_derivative(const ModeVector& h, const ModeVector& k, double kappa,
                             const PotentialSpectrum& W);
ModeVector mixed_derivative(const ModeVector& p, double kappa, const PotentialSpectrum& W,
                            const ModeVector& h);
ModeVector dF_dkappa(const ModeVector& p, double kappa, const PotentialSpectrum& W);

DensityProfile synthesize_density(const ModeVector& p, int M);

struct DensityAnalysis {
    ModeVector modes;
    double odd_energy = 0.0;  // relative energy of the odd part
    bool symmetry_warning = false;
};
DensityAnalysis analyze_density_checked(const DensityProfile& d, int N, double odd_tol = 1e-10);
ModeVector analyze_density(const DensityProfile& d, int N);

DensityProfile fixed_point_map(const ModeVector& p, double kappa, const PotentialSpectrum& W, int M);
// max-abs difference between p and the modes of its Gibbs image
double self_consistency_residual(const ModeVector& p, double kappa, const PotentialSpectrum& W,
                                 int M = 0);

namespace detail {
void check_finite(const ModeVector& p, double kappa);
}

}  // namespace mvbif
