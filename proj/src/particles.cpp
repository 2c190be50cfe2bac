#include "mvbif/particles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <thread>
#include <utility>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// fixed reduction blocks, so sums do not depend on the thread count
constexpr int kBlock = 512;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_open(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

double wrap(double x) {
    x = std::fmod(x, kTwoPi);
    if (x < 0) x += kTwoPi;
    if (x >= kTwoPi) x = 0.0;
    return x;
}

template <class F>
void parallel_blocks(int nblocks, int threads, F&& f) {
    threads = std::max(1, std::min(threads, nblocks));
    if (threads == 1) {
        for (int b = 0; b < nblocks; ++b) f(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int b = t; b < nblocks; b += threads) f(b);
        });
    for (auto& th : pool) th.join();
}

// two independent normals for the particle pair (2 k, 2 k + 1)
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t step, std::uint64_t pair) {
    const std::uint64_t k = splitmix(splitmix(seed ^ 0x5851f42d4c957f2dULL) ^ step) ^ (pair * 0xd1342543de82ef95ULL);
    const double u1 = unit_open(splitmix(k)), u2 = unit_open(splitmix(k ^ 0xa0761d6478bd642fULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

// modes beyond the last one with a non-negligible l a_l do not move particles
int effective_modes(const PotentialSpectrum& W) {
    double mx = 0.0;
    for (int l = 1; l <= W.size(); ++l) mx = std::max(mx, std::abs(l * W.a(l)));
    int L = W.size();
    while (L > 0 && std::abs(L * W.a(L)) <= 1e-16 * mx) --L;
    return L;
}

std::vector<std::complex<double>> phases(const std::vector<double>& th, int threads) {
    const int n = static_cast<int>(th.size());
    std::vector<std::complex<double>> e(th.size());
    parallel_blocks((n + kBlock - 1) / kBlock, threads, [&](int b) {
        for (int i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i)
            e[static_cast<std::size_t>(i)] = std::polar(1.0, th[static_cast<std::size_t>(i)]);
    });
    return e;
}

// S_l = sum_j e^{i l theta_j}, l = 1..L
std::vector<std::complex<double>> mode_sums(const std::vector<std::complex<double>>& e1s, int L, int threads) {
    const int n = static_cast<int>(e1s.size());
    const int nb = (n + kBlock - 1) / kBlock;
    std::vector<std::complex<double>> part(static_cast<std::size_t>(nb) * L);
    parallel_blocks(nb, threads, [&](int b) {
        std::complex<double>* out = part.data() + static_cast<std::size_t>(b) * L;
        for (int i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
            const std::complex<double> e1 = e1s[static_cast<std::size_t>(i)];
            std::complex<double> e = e1;
            for (int l = 0; l < L; ++l) {
                out[l] += e;
                e *= e1;
            }
        }
    });
    std::vector<std::complex<double>> S(static_cast<std::size_t>(L));
    for (int b = 0; b < nb; ++b)
        for (int l = 0; l < L; ++l) S[static_cast<std::size_t>(l)] += part[static_cast<std::size_t>(b) * L + l];
    return S;
}

std::vector<double> drift_from_phases(const std::vector<std::complex<double>>& e1s, double kappa,
                                      const PotentialSpectrum& W, int threads) {
    const int n = static_cast<int>(e1s.size()), L = effective_modes(W);
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    if (L == 0 || kappa == 0.0) return d;
    const auto S = mode_sums(e1s, L, threads);
    // W'(x) = -sum l a_l sin(l x); sum_j sin l(t_i - t_j) = Im(e^{i l t_i} conj(S_l))
    std::vector<std::complex<double>> c(static_cast<std::size_t>(L));
    for (int l = 1; l <= L; ++l) c[static_cast<std::size_t>(l - 1)] = -kappa / n * l * W.a(l) * std::conj(S[static_cast<std::size_t>(l - 1)]);
    const int nb = (n + kBlock - 1) / kBlock;
    parallel_blocks(nb, threads, [&](int b) {
        for (int i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
            const std::complex<double> e1 = e1s[static_cast<std::size_t>(i)];
            std::complex<double> e = e1;
            double acc = 0.0;
            for (int l = 0; l < L; ++l) {
                acc += (e * c[static_cast<std::size_t>(l)]).imag();
                e *= e1;
            }
            d[static_cast<std::size_t>(i)] = acc;
        }
    });
    return d;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
    const auto z = normal_pair(seed, step, index / 2);
    return index % 2 ? z.second : z.first;
}

ParticleState make_uniform_state(int n, std::uint64_t seed) {
    if (n < 1) throw InvalidInput("need at least one particle");
    ParticleState s;
    s.seed = seed;
    s.angles.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        s.angles[static_cast<std::size_t>(i)] = kTwoPi * unit_open(splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(i)));
    return s;
}

std::vector<double> drift(const ParticleState& s, double kappa, const PotentialSpectrum& W, int threads) {
    return drift_from_phases(phases(s.angles, threads), kappa, W, threads);
}

std::vector<double> drift_naive(const ParticleState& s, double kappa, const PotentialSpectrum& W) {
    const std::size_t n = s.angles.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += W.derivative(s.angles[i] - s.angles[j]);
        d[i] = kappa * acc / static_cast<double>(n);
    }
    return d;
}

void step(ParticleState& s, double dt, double kappa, const PotentialSpectrum& W, bool noise, int threads) {
    if (!(dt > 0) || !std::isfinite(dt)) throw InvalidInput("time step must be positive");
    const auto d = drift(s, kappa, W, threads);
    const double amp = std::sqrt(2.0 * dt);
    const int n = static_cast<int>(s.angles.size());
    const int nb = (n + kBlock - 1) / kBlock;
    bool finite = true;
    for (double x : d) finite = finite && std::isfinite(x);
    if (!finite) throw Divergence("non-finite particle drift");
    parallel_blocks(nb, threads, [&](int b) {
        // blocks have even length, so normal pairs never straddle two blocks
        for (int i = b * kBlock; i < std::min(n, (b + 1) * kBlock); i += 2) {
            const auto u = static_cast<std::size_t>(i);
            const auto z = noise ? normal_pair(s.seed, s.step_index, u / 2) : std::pair<double, double>{0.0, 0.0};
            s.angles[u] = wrap(s.angles[u] + dt * d[u] + amp * z.first);
            if (i + 1 < n) s.angles[u + 1] = wrap(s.angles[u + 1] + dt * d[u + 1] + amp * z.second);
        }
    });
    s.t += dt;
    ++s.step_index;
}

EmpiricalModes empirical_modes(const std::vector<double>& angles, int n_modes) {
    if (angles.empty()) throw InvalidInput("no particles");
    const auto S = mode_sums(phases(angles, 1), n_modes, 1);
    const double n = static_cast<double>(angles.size());
    EmpiricalModes e;
    e.modes = ModeVector(n_modes);
    e.magnitude = ModeVector(n_modes);
    for (int l = 0; l < n_modes; ++l) {
        e.modes[l] = S[static_cast<std::size_t>(l)].real() / n;
        e.magnitude[l] = std::abs(S[static_cast<std::size_t>(l)]) / n;
    }
    e.standard_error = 1.0 / std::sqrt(n);
    return e;
}

StationaryReport stationary_compare(double kappa, const PotentialSpectrum& W, const ModeVector& solver_solution,
                                    const SimulationControls& ctl) {
    if (!(ctl.t_final > ctl.burn_in && ctl.burn_in >= 0)) throw InvalidInput("t_final must exceed burn_in");
    if (!(ctl.sample_every >= ctl.dt)) throw InvalidInput("sample interval shorter than the time step");
    if (ctl.batches < 2) throw InvalidInput("need at least two batches");
    ParticleState s = make_uniform_state(ctl.particles, ctl.seed);
    const auto steps = static_cast<std::uint64_t>(std::llround(ctl.t_final / ctl.dt));
    const auto every = static_cast<std::uint64_t>(std::max(1LL, std::llround(ctl.sample_every / ctl.dt)));
    const auto burn = static_cast<std::uint64_t>(std::llround(ctl.burn_in / ctl.dt));
    StationaryReport r;
    r.solver_p1 = solver_solution.size() ? std::abs(solver_solution[0]) : 0.0;
    std::vector<double> obs;
    const int L = std::max(2, W.size());
    for (std::uint64_t k = 1; k <= steps; ++k) {
        step(s, ctl.dt, kappa, W, true, ctl.threads);
        if (k % every) continue;
        const auto e = empirical_modes(s.angles, L);
        double E = 0.0;
        for (int l = 1; l <= W.size(); ++l) E += W.a(l) * e.magnitude[l - 1] * e.magnitude[l - 1];
        r.trajectory.push_back({s.t, e.magnitude[0], e.magnitude[1], E});
        if (k > burn) obs.push_back(e.magnitude[0]);
    }
    r.samples = static_cast<int>(obs.size());
    if (r.samples < ctl.batches) throw InsufficientData("fewer samples than batches");
    // batch means
    const int per = r.samples / ctl.batches;
    std::vector<double> means;
    for (int b = 0; b < ctl.batches; ++b) {
        double m = 0.0;
        for (int i = 0; i < per; ++i) m += obs[static_cast<std::size_t>(b * per + i)];
        means.push_back(m / per);
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= ctl.batches;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (ctl.batches - 1);
    r.mean_p1 = mean;
    r.standard_error = std::sqrt(var / ctl.batches);
    r.z_score = r.standard_error > 0 ? (r.mean_p1 - r.solver_p1) / r.standard_error : 0.0;
    return r;
}

}  // namespace mvbif
