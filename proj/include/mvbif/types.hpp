#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mvbif {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Modes p_1..p_N stored at indices 0..N-1. p_0 = 1/2 is implicit.
using ModeVector = Vec;

// Cosine coefficients a_1..a_NW of an even, zero-mean interaction potential.
struct PotentialSpectrum {
    std::vector<double> coefficients;
    double tail_bound = 0.0;  // bound on sup_{l > NW} l|a_l|
    std::string name = "finite";

    PotentialSpectrum() = default;
    explicit PotentialSpectrum(std::vector<double> a, double tail = 0.0, std::string label = "finite");

    int size() const { return static_cast<int>(coefficients.size()); }
    // a_l for l >= 1, zero beyond the stored range
    double a(int l) const {
        return (l >= 1 && l <= size()) ? coefficients[static_cast<std::size_t>(l - 1)] : 0.0;
    }
    double sup_weighted() const;  // max(max_l l|a_l|, tail_bound)
    double max_coefficient() const;
    double sup_norm_bound() const;  // sum |a_l|, bounds ||W||_inf
    double evaluate(double theta) const;
    double derivative(double theta) const;
};

PotentialSpectrum kuramoto_spectrum();
PotentialSpectrum logsine_spectrum(int N);  // a_l = 1/l
PotentialSpectrum finite_spectrum(std::vector<double> a);

double weighted_norm(const ModeVector& p);  // sqrt(sum (1+l^2) p_l^2)
double weighted_dot(const ModeVector& u, const ModeVector& v);
ModeVector unit_mode(int N, int l);

}  // namespace mvbif
