#pragma once

#include "mvbif/types.hpp"

namespace mvbif {

constexpr int kMaxBesselOrder = 256;

double bessel_i(int l, double x);
double bessel_i_scaled(int l, double x);  // e^{-x} I_l(x)
// e^{-x} I_l(x) for l = 0..lmax in one pass
std::vector<double> bessel_i_scaled_all(int lmax, double x);

PotentialSpectrum transformer_spectrum(double beta, int NW);
double kappa_star(double beta, int l);                   // beta / I_l(beta)
double signature_ratio_transformer(double beta, int l);  // (I_l - 2 I_2l)/(I_l - I_2l)
double bessel_ratio_21(double beta);                     // I_2 / I_1
double solve_beta_threshold(double target);

struct ClusteringDiagnostic {
    double beta = 0.0;
    int L = 0;
    Mat exact;      // (a_l1 - a_l2)/a_l1, l1 < l2 in the upper triangle (1-based shift)
    Mat predicted;  // (l2^2 - l1^2)/(2 beta)
};
ClusteringDiagnostic clustering_diagnostic(double beta, int L);

}  // namespace mvbif
