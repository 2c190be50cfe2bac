#include "mvbif/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// cos(l theta_j) for l = 1..N on an M-point grid
struct CosTable {
    int N, M;
    std::vector<double> c;  // row l-1, column j
    CosTable(int N_, int M_) : N(N_), M(M_), c(static_cast<std::size_t>(N_) * M_) {
        for (int l = 1; l <= N; ++l)
            for (int j = 0; j < M; ++j)
                c[idx(l, j)] = std::cos(kTwoPi * static_cast<double>((static_cast<long long>(l) * j) % M) / M);
    }
    std::size_t idx(int l, int j) const { return static_cast<std::size_t>(l - 1) * M + j; }
    double operator()(int l, int j) const { return c[idx(l, j)]; }
};

// Gibbs density exp(sum q_l cos l theta)/Z and its free energy at kappa
struct GibbsEval {
    ModeVector p;
    double F = 0.0, S = 0.0, E = 0.0;
};

GibbsEval gibbs_eval(const Vec& q, double kappa, const PotentialSpectrum& W, const CosTable& T) {
    const int N = T.N, M = T.M;
    std::vector<double> expo(static_cast<std::size_t>(M), 0.0);
    for (int l = 1; l <= N; ++l) {
        const double ql = q[l - 1];
        if (ql == 0.0) continue;
        for (int j = 0; j < M; ++j) expo[static_cast<std::size_t>(j)] += ql * T(l, j);
    }
    const double mx = *std::max_element(expo.begin(), expo.end());
    double z = 0.0;
    for (double& e : expo) z += (e = std::exp(e - mx));
    z /= M;
    GibbsEval g;
    g.p = ModeVector::Zero(N);
    for (int l = 1; l <= N; ++l) {
        double s = 0.0;
        for (int j = 0; j < M; ++j) s += expo[static_cast<std::size_t>(j)] * T(l, j);
        g.p[l - 1] = s / (M * z);
    }
    const double logZ = std::log(z) + mx;
    g.S = q.dot(g.p) - logZ;
    g.E = interaction_energy(g.p, W);
    g.F = g.S - 0.5 * kappa * g.E;
    return g;
}

Vec gibbs_exponent(const ModeVector& p, double kappa, const PotentialSpectrum& W) {
    Vec q(p.size());
    for (int l = 1; l <= p.size(); ++l) q[l - 1] = kappa * W.a(l) * p[l - 1];
    return q;
}

Minimizer trivial_minimizer(int N) {
    Minimizer m;
    m.p = ModeVector::Zero(N);
    return m;
}

}  // namespace

double interaction_energy(const ModeVector& p, const PotentialSpectrum& W) {
    double e = 0.0;
    for (int l = 1; l <= p.size(); ++l) e += W.a(l) * p[l - 1] * p[l - 1];
    return e;
}

double interaction_energy_quadrature(const ModeVector& p, const PotentialSpectrum& W, int M) {
    const DensityProfile d = synthesize_density(p, M);
    std::vector<double> w(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) w[static_cast<std::size_t>(k)] = W.evaluate(kTwoPi * k / M);
    double sum = 0.0;
    for (int i = 0; i < M; ++i) {
        double inner = 0.0;
        for (int j = 0; j < M; ++j) inner += w[static_cast<std::size_t>((i - j + M) % M)] * d.values[static_cast<std::size_t>(j)];
        sum += inner * d.values[static_cast<std::size_t>(i)];
    }
    return sum / (static_cast<double>(M) * M);
}

FreeEnergy free_energy(const ModeVector& p, double kappa, const PotentialSpectrum& W, int M) {
    detail::check_finite(p, kappa);
    const int N = static_cast<int>(p.size());
    if (M == 0) M = default_grid(N);
    const DensityProfile d = synthesize_density(p, M);
    FreeEnergy f;
    f.interaction = 0.5 * kappa * interaction_energy(p, W);
    if (!d.positive()) {
        f.infinite = true;
        f.entropy = f.total = std::numeric_limits<double>::infinity();
        return f;
    }
    double s = 0.0;
    for (double v : d.values) s += v * std::log(v);
    f.entropy = s / M;
    f.total = f.entropy - f.interaction;
    return f;
}

Minimizer local_minimize(const ModeVector& start, double kappa, const PotentialSpectrum& W,
                         const MinimizeControls& ctl) {
    detail::check_finite(start, kappa);
    const int N = static_cast<int>(start.size());
    if (start.cwiseAbs().maxCoeff() == 0.0) return trivial_minimizer(N);
    const CosTable T(N, ctl.grid > 0 ? ctl.grid : default_grid(N));

    // descent in exponent coordinates: grad = C (q - kappa a p(q)) with C the covariance, so
    // -(q - kappa a p) is a descent direction
    Vec q = gibbs_exponent(start, kappa, W);
    GibbsEval g = gibbs_eval(q, kappa, W, T);
    for (int it = 0; it < ctl.descent_iterations; ++it) {
        const Vec dir = q - gibbs_exponent(g.p, kappa, W);
        if (dir.cwiseAbs().maxCoeff() < ctl.descent_tol) break;
        double eta = 1.0;
        bool moved = false;
        for (int h = 0; h < 20; ++h, eta *= 0.5) {
            const Vec qn = q - eta * dir;
            GibbsEval gn = gibbs_eval(qn, kappa, W, T);
            if (gn.F < g.F) {
                q = qn, g = std::move(gn), moved = true;
                break;
            }
        }
        if (!moved) break;
        if (g.p.cwiseAbs().maxCoeff() < ctl.trivial_norm) return trivial_minimizer(N);
    }
    if (g.p.cwiseAbs().maxCoeff() < ctl.trivial_norm) return trivial_minimizer(N);

    Minimizer out;
    out.p = g.p;
    out.best_effort = true;
    try {
        BranchPoint b = newton_solve(g.p, kappa, W, ctl.polish);
        if (b.p.cwiseAbs().maxCoeff() < ctl.trivial_norm) {
            // polish collapsed onto the uniform state
            if (g.F >= -1e-12) return trivial_minimizer(N);
        } else {
            const FreeEnergy fb = free_energy(b.p, kappa, W, T.M);
            if (!fb.infinite && fb.total <= g.F + 1e-9 * (1.0 + std::abs(g.F))) {
                out.p = b.p;
                out.best_effort = false;
            }
        }
    } catch (const NumericalError&) {
    }
    const FreeEnergy f = free_energy(out.p, kappa, W, T.M);
    out.m = f.infinite ? g.F : f.total;
    out.entropy = f.infinite ? g.S : f.entropy;
    out.E = interaction_energy(out.p, W);
    out.residual_norm = residual(out.p, kappa, W).cwiseAbs().maxCoeff();
    return out;
}

Minimizer minimize_energy(double kappa, const PotentialSpectrum& W, int N, const MinimizeControls& ctl,
                          const std::vector<ModeVector>& extra_starts) {
    if (N < 1) throw InvalidInput("truncation must be positive");
    detail::check_finite(ModeVector::Zero(1), kappa);
    std::vector<ModeVector> starts = extra_starts;
    for (auto& s : starts)
        if (s.size() != N) throw InvalidInput("extra start has wrong size");

    // leading positive modes
    std::vector<int> modes;
    for (int l = 1; l <= std::min(N, W.size()); ++l)
        if (W.a(l) > 0) modes.push_back(l);
    std::stable_sort(modes.begin(), modes.end(), [&](int x, int y) { return W.a(x) > W.a(y); });
    if (static_cast<int>(modes.size()) > ctl.seed_modes) modes.resize(static_cast<std::size_t>(ctl.seed_modes));
    for (int l : modes) {
        for (double amp : ctl.seed_amplitudes)
            for (double sg : {1.0, -1.0}) starts.push_back(sg * amp * unit_mode(N, l));
        try {
            const SeriesSolution s = series_density(W, l, kappa, N);
            starts.push_back(s.modes_plus);
            starts.push_back(s.modes_minus);
        } catch (const std::exception&) {
        }
    }

    Minimizer best = trivial_minimizer(N);
    auto canonical_phase = [&](Minimizer& m) {
        // theta -> theta + pi/l0 flips p_{k l0} by (-1)^k when p is l0-periodic
        const double sc = m.p.cwiseAbs().maxCoeff();
        int l0 = 0;
        for (int l = 1; l <= N && !l0; ++l)
            if (std::abs(m.p[l - 1]) > 1e-8 * sc) l0 = l;
        if (!l0 || m.p[l0 - 1] > 0) return;
        for (int l = 1; l <= N; ++l)
            if (l % l0 && std::abs(m.p[l - 1]) > 1e-12 * sc) return;
        for (int k = 1; k * l0 <= N; k += 2) m.p[k * l0 - 1] = -m.p[k * l0 - 1];
    };
    for (const auto& s : starts) {
        Minimizer m;
        try {
            m = local_minimize(s, kappa, W, ctl);
        } catch (const NumericalError&) {
            continue;
        }
        if (m.m < best.m) best = std::move(m);
    }
    canonical_phase(best);
    return best;
}

EnergyScan scan_m(const PotentialSpectrum& W, int N, double kappa_lo, double kappa_hi, double step,
                  const EnergyControls& ctl) {
    if (!(step > 0)) throw InvalidInput("scan step must be positive");
    if (!(kappa_hi >= kappa_lo && kappa_lo >= 0)) throw InvalidInput("bad scan range");
    const int n = static_cast<int>(std::floor((kappa_hi - kappa_lo) / step + 1e-9)) + 1;
    EnergyScan sc;
    ModeVector warm;
    for (int i = 0; i < n; ++i) {
        const double k = kappa_lo + i * step;
        std::vector<ModeVector> extra;
        if (warm.size() == N && warm.cwiseAbs().maxCoeff() > 0) extra.push_back(warm);
        Minimizer m = minimize_energy(k, W, N, ctl.minimize, extra);
        sc.kappa.push_back(k);
        sc.m.push_back(m.m);
        sc.E.push_back(m.E);
        sc.entropy.push_back(m.entropy);
        sc.norm.push_back(m.p.norm());
        warm = m.p;
        sc.minimizers.push_back(std::move(m.p));
    }
    sc.kink.assign(static_cast<std::size_t>(n), false);
    std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        d2[u] = sc.m[u + 1] - 2 * sc.m[u] + sc.m[u - 1];
        sc.max_second_difference = (i == 1) ? d2[u] : std::max(sc.max_second_difference, d2[u]);
        if (d2[u] > ctl.concavity_tol) sc.concave = false;
    }
    // a kink spreads over at most two adjacent second differences; compare with the smooth
    // curvature two and three grid points away
    for (int i = 1; i + 1 < n; ++i) {
        double scale = 0.0;
        for (int o : {-3, -2, 2, 3}) {
            const int k = i + o;
            if (k >= 1 && k + 1 < n) scale = std::max(scale, std::abs(d2[static_cast<std::size_t>(k)]));
        }
        const double v = d2[static_cast<std::size_t>(i)];
        sc.kink[static_cast<std::size_t>(i)] = v < -ctl.kink_tol * scale && v < -1e3 * ctl.m_tol * step;
    }

    // one coexistence point per run of flagged kinks
    for (int i = 1; i + 1 < n;) {
        if (!sc.kink[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n - 1 && sc.kink[static_cast<std::size_t>(j + 1)]) ++j;
        const auto lo = static_cast<std::size_t>(i - 1), hi = static_cast<std::size_t>(j + 1);
        Coexistence c;
        double a = sc.kappa[lo], b = sc.kappa[hi];
        ModeVector L = sc.minimizers[lo], R = sc.minimizers[hi];
        auto diff = [&](double k, Minimizer& ml, Minimizer& mr) {
            ml = local_minimize(L, k, W, ctl.minimize);
            mr = local_minimize(R, k, W, ctl.minimize);
            return ml.m - mr.m;
        };
        Minimizer ml, mr;
        bool refined = false;
        try {
            double fa = diff(a, ml, mr), fb = diff(b, ml, mr);
            if (fa <= 0 && fb >= 0 && (ml.p - mr.p).norm() > 0) {
                for (int it = 0; it < 60 && b - a > 1e-12 * (1 + b); ++it) {
                    const double mid = 0.5 * (a + b);
                    const double fm = diff(mid, ml, mr);
                    (fm <= 0 ? a : b) = mid;
                    if (fm <= 0) fa = fm; else fb = fm;
                }
                const double k = 0.5 * (a + b);
                diff(k, ml, mr);
                refined = (ml.p - mr.p).norm() > ctl.jump_tol;
                c.kappa = k;
            }
        } catch (const NumericalError&) {
        }
        if (refined) {
            c.left = ml.p, c.right = mr.p, c.E_left = ml.E, c.E_right = mr.E;
        } else {
            c.kappa = sc.kappa[static_cast<std::size_t>(i)];
            c.left = sc.minimizers[lo], c.right = sc.minimizers[hi];
            c.E_left = sc.E[lo], c.E_right = sc.E[hi];
        }
        sc.coexistence.push_back(std::move(c));
        i = j + 1;
    }
    return sc;
}

std::string to_string(TransitionKind k) {
    switch (k) {
        case TransitionKind::none: return "none";
        case TransitionKind::continuous: return "continuous";
        case TransitionKind::discontinuous: return "discontinuous";
    }
    return "?";
}

Transition classify_transition(const PotentialSpectrum& W, int N, const EnergyControls& ctl, double kappa_lo,
                               double kappa_hi) {
    const double amax = W.max_coefficient();
    if (!(amax > 0)) throw InvalidInput("potential has no positive coefficient");
    Transition tr;
    tr.kappa_star = 2.0 / amax;
    if (kappa_lo <= 0) kappa_lo = 0.05 * tr.kappa_star;
    if (kappa_hi <= 0) kappa_hi = 1.02 * tr.kappa_star;
    if (!(kappa_hi > kappa_lo)) throw InvalidInput("bad transition search range");

    // coarse sweep for the first kappa with m < -m_tol
    const int n = 48;
    double lo = kappa_lo, hi = -1;
    ModeVector warm, hi_p;
    for (int i = 0; i <= n; ++i) {
        const double k = kappa_lo + (kappa_hi - kappa_lo) * i / n;
        std::vector<ModeVector> extra;
        if (warm.size() == N && warm.cwiseAbs().maxCoeff() > 0) extra.push_back(warm);
        Minimizer m = minimize_energy(k, W, N, ctl.minimize, extra);
        warm = m.p;
        if (m.m < -ctl.m_tol) {
            hi = k, hi_p = m.p;
            break;
        }
        lo = k;
    }
    if (hi < 0) throw NoRoot("no transition point in the search range");

    // bisection on the sign of m, warm-started from the non-trivial minimizer
    for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        Minimizer m = minimize_energy(mid, W, N, ctl.minimize, {hi_p});
        if (m.m < 0 && !m.trivial()) {
            hi = mid, hi_p = m.p;
        } else {
            lo = mid;
        }
    }
    tr.kappa_c = hi;

    // minimizer norm at kappa_c+ extrapolated to kappa_c under square-root scaling
    const double d = 1e-3 * tr.kappa_c;
    const Minimizer m1 = minimize_energy(tr.kappa_c + d, W, N, ctl.minimize, {hi_p});
    const Minimizer m4 = minimize_energy(tr.kappa_c + 4 * d, W, N, ctl.minimize, {m1.p});
    const double n1 = m1.p.norm(), n4 = m4.p.norm();
    tr.norm_at = std::max(0.0, 2 * n1 - n4);
    tr.minimizer = hi_p;
    tr.kind = tr.norm_at > ctl.jump_tol ? TransitionKind::discontinuous : TransitionKind::continuous;
    return tr;
}

EnergyCertificate subcritical_energy_certificate(const Branch& branch, double kappa_star, const PotentialSpectrum& W,
                                                 int M) {
    if (branch.points.size() < 2) throw InsufficientData("certificate needs at least two branch points");
    if (!(branch.points[1].kappa < kappa_star)) throw InvalidInput("branch is not on the subcritical side");
    const int N = static_cast<int>(branch.points.front().p.size());
    if (M == 0) M = default_grid(N);
    EnergyCertificate c;
    // trapezoid rule for the integral of (kappa_s - kappa*) d(E/2), starting from the uniform state
    double prevK = kappa_star, prevE = 0.0, acc = 0.0;
    for (const auto& b : branch.points) {
        const double e = interaction_energy(b.p, W);
        acc += 0.5 * ((prevK - kappa_star) + (b.kappa - kappa_star)) * 0.5 * (e - prevE);
        prevK = b.kappa, prevE = e;
    }
    const BranchPoint& last = branch.points.back();
    c.integrated = acc;
    c.direct = free_energy(last.p, kappa_star, W, M).total;
    c.eta_kappa = last.kappa;
    return c;
}

}  // namespace mvbif
