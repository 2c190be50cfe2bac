#include "mvbif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvbif/errors.hpp"
#include "mvbif/special_functions.hpp"

namespace mvbif {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::trivial: return "trivial";
        case Provenance::pitchfork: return "pitchfork";
        case Provenance::multi_mode: return "multi_mode";
        case Provenance::transcritical: return "transcritical";
        case Provenance::series_seeded: return "series_seeded";
    }
    return "trivial";
}

Pin Pin::mode(int N, int l, double value) { return Pin{unit_mode(N, l), value}; }

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double pin_residual(const Pin& pin, const ModeVector& p) { return pin.c.dot(p) - pin.value; }

Vec weights(int N) {
    Vec w(N + 1);
    for (int l = 1; l <= N; ++l) w[l - 1] = 1.0 + double(l) * l;
    w[N] = 1.0;
    return w;
}

double wnorm(const Vec& x, const Vec& w) { return std::sqrt((x.array().square() * w.array()).sum()); }

Vec pack(const ModeVector& p, double kappa) {
    Vec x(p.size() + 1);
    x.head(p.size()) = p;
    x[p.size()] = kappa;
    return x;
}

// [J F_k; row] for the bordered systems
Mat bordered(const ModeVector& p, double kappa, const PotentialSpectrum& W, const Vec& row) {
    const int N = static_cast<int>(p.size());
    Mat A(N + 1, N + 1);
    A.topLeftCorner(N, N) = jacobian(p, kappa, W);
    A.topRightCorner(N, 1) = dF_dkappa(p, kappa, W);
    A.bottomRows(1) = row.transpose();
    return A;
}

}  // namespace

BranchPoint newton_solve(const ModeVector& seed, double kappa, const PotentialSpectrum& W, const NewtonOptions& opt,
                         const Pin* pin) {
    detail::check_finite(seed, kappa);
    const int N = static_cast<int>(seed.size());
    if (pin && pin->c.size() != N) throw InvalidInput("pin vector size differs from truncation");
    ModeVector p = seed;
    double k = kappa;
    auto norm_of = [&](const ModeVector& q, double kk) {
        double r = max_abs(residual(q, kk, W));
        if (pin) r = std::max(r, std::abs(pin_residual(*pin, q)));
        return r;
    };
    double fn = norm_of(p, k);
    if (!pin && opt.gibbs_seed && fn > opt.tol && kappa > 0) {
        const ModeVector g = analyze_density(fixed_point_map(p, k, W, default_grid(N)), N);
        const double fg = norm_of(g, k);
        if (g.allFinite() && std::isfinite(fg)) p = g, fn = fg;
    }
    for (int it = 0; it <= opt.max_iter; ++it) {
        if (!std::isfinite(fn)) throw Divergence("Newton iterate is not finite");
        if (fn <= opt.tol) {
            BranchPoint bp;
            bp.p = p;
            bp.kappa = k;
            bp.residual_norm = max_abs(residual(p, k, W));
            bp.iterations = it;
            return bp;
        }
        if (it == opt.max_iter) break;
        Vec step;
        if (pin) {
            Vec row = Vec::Zero(N + 1);
            row.head(N) = pin->c;
            Eigen::PartialPivLU<Mat> lu(bordered(p, k, W, row));
            if (!(lu.rcond() > opt.rcond_min)) throw SingularJacobian("bordered Jacobian is singular");
            Vec G(N + 1);
            G.head(N) = residual(p, k, W);
            G[N] = pin_residual(*pin, p);
            step = -lu.solve(G);
        } else {
            Eigen::PartialPivLU<Mat> lu(jacobian(p, k, W));
            if (!(lu.rcond() > opt.rcond_min)) throw SingularJacobian("Jacobian is singular");
            step = -lu.solve(residual(p, k, W));
        }
        double lam = 1.0;
        ModeVector pn;
        double kn = k, fnew = 0;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            pn = p + lam * step.head(N);
            kn = pin ? k + lam * step[N] : k;
            fnew = pn.allFinite() && std::isfinite(kn) && kn > 0 ? norm_of(pn, kn) : INFINITY;
            if (fnew < fn) break;
            lam *= 0.5;
        }
        if (!std::isfinite(fnew)) throw Divergence("Newton step left the admissible region");
        p = pn;
        k = kn;
        fn = fnew;
    }
    throw Divergence("Newton did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

Branch continue_branch(const BranchPoint& start, const Vec& direction, const PotentialSpectrum& W,
                       const ContinuationControls& ctl) {
    const int N = static_cast<int>(start.p.size());
    if (direction.size() != N + 1) throw InvalidInput("continuation direction must have size N+1");
    if (!(ctl.h_min > 0 && ctl.h_min <= ctl.h_max)) throw InvalidInput("bad continuation step bounds");
    const Vec w = weights(N);
    Branch br;
    BranchPoint first = start;
    first.s = 0.0;
    first.residual_norm = max_abs(residual(start.p, start.kappa, W));
    if (first.residual_norm > std::max(ctl.newton.tol, 1e-9)) throw InvalidInput("continuation start is not converged");
    br.points.push_back(first);

    Vec X = pack(start.p, start.kappa);
    Vec t;
    {
        Vec row = (direction.array() * w.array()).matrix();
        Eigen::PartialPivLU<Mat> lu(bordered(start.p, start.kappa, W, row));
        Vec rhs = Vec::Zero(N + 1);
        rhs[N] = 1.0;
        t = lu.solve(rhs);
        if (!t.allFinite() || wnorm(t, w) == 0) t = direction;
        t /= wnorm(t, w);
        if ((t.array() * direction.array() * w.array()).sum() < 0) t = -t;
    }
    double h = std::clamp(ctl.h_init, ctl.h_min, ctl.h_max);
    double s = 0.0;
    while (static_cast<int>(br.points.size()) < ctl.max_points) {
        const Vec Xp = X + h * t;
        Vec Y = Xp;
        bool ok = false;
        int iters = 0;
        for (; iters < ctl.newton.max_iter; ++iters) {
            const ModeVector p = Y.head(N);
            const double k = Y[N];
            if (!(k > 0) || !Y.allFinite()) break;
            Vec G(N + 1);
            G.head(N) = residual(p, k, W);
            G[N] = ((Y - Xp).array() * t.array() * w.array()).sum();
            if (max_abs(G) <= ctl.newton.tol) {
                ok = true;
                break;
            }
            Vec row = (t.array() * w.array()).matrix();
            Eigen::PartialPivLU<Mat> lu(bordered(p, k, W, row));
            if (!(lu.rcond() > ctl.newton.rcond_min)) break;
            Y -= lu.solve(G);
        }
        if (!ok) {
            h *= 0.5;
            if (h < ctl.h_min) {
                br.failed = true;
                br.stop_reason = "step collapse";
                break;
            }
            continue;
        }
        const double ds = wnorm(Y - X, w);
        s += ds;
        BranchPoint bp;
        bp.p = Y.head(N);
        bp.kappa = Y[N];
        bp.s = s;
        bp.residual_norm = max_abs(residual(bp.p, bp.kappa, W));
        bp.iterations = iters;
        br.points.push_back(bp);
        t = (Y - X) / ds;
        X = Y;
        if (iters <= ctl.fast_iterations) h = std::min(ctl.h_max, h * ctl.grow);
        if (bp.kappa < ctl.kappa_min || bp.kappa > ctl.kappa_max) {
            // land on the bound when the branch crosses it transversally
            const BranchPoint& prev = br.points[br.points.size() - 2];
            const double kb = bp.kappa > ctl.kappa_max ? ctl.kappa_max : ctl.kappa_min;
            const double f = (kb - prev.kappa) / (bp.kappa - prev.kappa);
            if (f > 0 && f < 1) {
                try {
                    BranchPoint e = newton_solve(prev.p + f * (bp.p - prev.p), kb, W, ctl.newton);
                    if ((e.p - bp.p).cwiseAbs().maxCoeff() <= 2 * (bp.p - prev.p).cwiseAbs().maxCoeff() + 1e-12) {
                        e.s = prev.s + f * (bp.s - prev.s);
                        br.points.back() = e;
                    }
                } catch (const NumericalError&) {
                }
            }
            br.stop_reason = "kappa bound";
            break;
        }
        if (s >= ctl.max_arclength) {
            br.stop_reason = "arclength budget";
            break;
        }
        if (ctl.trivial_stop > 0 && weighted_norm(bp.p) < ctl.trivial_stop) {
            br.stop_reason = "returned to trivial branch";
            break;
        }
    }
    if (br.stop_reason.empty()) br.stop_reason = "point budget";
    return br;
}

ModeVector kernel_direction(const BifurcationReport& report, int N, int pattern) {
    if (report.modes.empty()) throw InvalidInput("report has no modes");
    for (int l : report.modes)
        if (l > N) throw InvalidInput("truncation smaller than bifurcating mode");
    ModeVector d = ModeVector::Zero(N);
    if (report.kind == BifurcationKind::transcritical) {
        static const int patterns[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
        if (report.modes.size() != 3 || pattern < 0 || pattern > 3) throw InvalidInput("bad transcritical pattern");
        for (int i = 0; i < 3; ++i) d[report.modes[static_cast<std::size_t>(i)] - 1] = patterns[pattern][i];
        return d;
    }
    if (report.kind == BifurcationKind::multi_mode_infeasible)
        throw InvalidInput("no same-signed modal weights: multi-mode branch does not exist");
    if (report.modes.size() == 1) {
        d[report.modes.front() - 1] = 1.0;
        return d;
    }
    if (report.modal_weights.size() != report.modes.size()) throw InvalidInput("multi-mode report lacks modal weights");
    for (std::size_t i = 0; i < report.modes.size(); ++i) d[report.modes[i] - 1] = report.modal_weights[i];
    return d;
}

double branch_amplitude(const BifurcationReport& report, const ModeVector& p, int pattern) {
    const ModeVector d = kernel_direction(report, static_cast<int>(p.size()), pattern);
    return d.dot(p) / d.squaredNorm();
}

namespace {

double predicted_kappa(const BifurcationReport& r, double eps) {
    switch (r.kind) {
        case BifurcationKind::transcritical: return (2.0 / r.level) * (1.0 - eps);
        case BifurcationKind::multi_mode_pitchfork: return (2.0 / r.level) * (1.0 + r.sigma * eps * eps / 2.0);
        case BifurcationKind::supercritical_pitchfork:
        case BifurcationKind::subcritical_pitchfork: return r.kappa_star + 0.5 * r.curvature * eps * eps;
        default: return r.kappa_star;
    }
}

}  // namespace

BranchPoint switch_branch(const BifurcationReport& report, double eps, const PotentialSpectrum& W, int N,
                          const SwitchOptions& opt) {
    if (report.kind == BifurcationKind::unclassified) throw InvalidInput("report is not classified");
    if (eps == 0.0 || !std::isfinite(eps)) throw InvalidInput("switching amplitude must be non-zero");
    const ModeVector d = kernel_direction(report, N, opt.pattern);
    std::string last = "no attempt";
    for (double e = eps; std::abs(e) <= opt.eps_max; e *= 2.0) {
        Pin pin{d / d.squaredNorm(), e};
        try {
            BranchPoint bp = newton_solve(e * d, predicted_kappa(report, e), W, opt.newton, &pin);
            if (weighted_norm(bp.p) > opt.collapse_ratio * std::abs(e) && bp.kappa > 0) return bp;
            last = "collapsed to the trivial solution";
        } catch (const NumericalError& ex) {
            last = ex.what();
        }
    }
    throw Divergence("branch switching failed: " + last);
}

std::vector<double> z_recursion(const PotentialSpectrum& W, int m, double kappa, int Lz) {
    if (m < 1 || Lz < 1) throw InvalidInput("z recursion needs m >= 1 and Lz >= 1");
    std::vector<double> z(static_cast<std::size_t>(Lz), 0.0);
    z[0] = 1.0;
    for (int l = 2; l <= Lz; ++l) {
        const double den = l * m * (2.0 - kappa * W.a(l * m));
        if (std::abs(den) <= 1e-13 * l * m)
            throw ResonantDenominator("2 - kappa a_{lm} vanishes at l = " + std::to_string(l), l);
        double s = 0;
        for (int j = 1; j < l; ++j)
            s += j * m * W.a(j * m) * z[static_cast<std::size_t>(j - 1)] * z[static_cast<std::size_t>(l - j - 1)];
        z[static_cast<std::size_t>(l - 1)] = kappa * s / den;
    }
    return z;
}

double series_amplitude(const PotentialSpectrum& W, int m, double kappa) {
    const double am = W.a(m), a2 = W.a(2 * m);
    const double rad = 2 * (kappa * am - 2) * (2 - kappa * a2) / (kappa * kappa * am * (am - 2 * a2));
    if (!(rad >= 0)) throw SideMismatch("series amplitude radicand is negative on this side of kappa_m");
    return std::sqrt(rad);
}

SeriesSolution series_density(const PotentialSpectrum& W, int m, double kappa, int N, int Lz, bool check_side) {
    const double am = W.a(m), a2 = W.a(2 * m);
    if (!(am > 0) || !(kappa > 0)) throw InvalidInput("series density needs a_m > 0 and kappa > 0");
    if (check_side) {
        const double R = (am - 2 * a2) / (am - a2);
        if (!((kappa * am - 2) * R > 0))
            throw SideMismatch(R > 0 ? "supercritical branch exists only for kappa > kappa_m"
                                     : "subcritical branch exists only for kappa < kappa_m");
    }
    SeriesSolution out;
    out.m = m;
    out.kappa = kappa;
    out.z = z_recursion(W, m, kappa, Lz);
    out.s_plus = series_amplitude(W, m, kappa);
    out.s_minus = -out.s_plus;
    out.modes_plus = ModeVector::Zero(N);
    out.modes_minus = ModeVector::Zero(N);
    for (int l = 1; l <= Lz && l * m <= N; ++l) {
        const double z = out.z[static_cast<std::size_t>(l - 1)];
        out.modes_plus[l * m - 1] = std::pow(out.s_plus, l) * z;
        out.modes_minus[l * m - 1] = std::pow(out.s_minus, l) * z;
    }
    return out;
}

DensityProfile gibbs_from_exponent(const std::vector<std::pair<int, double>>& terms, int M) {
    if (M < 8) throw InvalidInput("grid too small");
    DensityProfile d;
    d.theta.resize(static_cast<std::size_t>(M));
    d.values.assign(static_cast<std::size_t>(M), 0.0);
    for (int j = 0; j < M; ++j) {
        const double th = 2.0 * std::numbers::pi * j / M;
        d.theta[static_cast<std::size_t>(j)] = th;
        for (auto [l, c] : terms) d.values[static_cast<std::size_t>(j)] += c * std::cos(l * th);
    }
    const double emax = *std::max_element(d.values.begin(), d.values.end());
    double sum = 0;
    for (double& v : d.values) sum += (v = std::exp(v - emax));
    for (double& v : d.values) v /= sum / M;
    d.log_Z = std::log(2.0 * std::numbers::pi * sum / M) + emax;
    d.Z = std::exp(d.log_Z);
    return d;
}

DensityProfile small_beta_density(double beta, int m, double kappa, int sign, int M) {
    const double km = kappa_star(beta, m);
    if (!(kappa > km)) throw SideMismatch("small-beta branch exists for kappa > kappa_m");
    double c = std::pow(beta, m - 1) / std::pow(2.0, m - 1);
    for (int i = 2; i <= m; ++i) c /= i;
    const double amp = 2.0 * std::sqrt(c * (kappa - km));
    return gibbs_from_exponent({{m, sign >= 0 ? amp : -amp}}, M);
}

DensityProfile large_beta_density(double beta, int m, double kappa, int sign, int M) {
    const double am = 2.0 / kappa_star(beta, m);
    const double delta = 2.0 - kappa * am;
    if (!(delta > 0)) throw SideMismatch("large-beta branch exists for kappa < kappa_m");
    const double amp = 2.0 * std::sqrt(3.0 * m * m * delta / (2.0 * beta));
    return gibbs_from_exponent({{m, sign >= 0 ? amp : -amp}, {2 * m, delta}}, M);
}

CurvatureFit quadratic_fit(const std::vector<double>& s, const std::vector<double>& kappa) {
    const int n = static_cast<int>(s.size());
    if (n < 3 || kappa.size() != s.size()) throw InsufficientData("quadratic fit needs at least 3 points");
    Mat A(n, 3);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = s[static_cast<std::size_t>(i)];
        A(i, 2) = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
        y[i] = kappa[static_cast<std::size_t>(i)];
    }
    Vec c = A.colPivHouseholderQr().solve(y);
    CurvatureFit f;
    f.c0 = c[0];
    f.c1 = c[1];
    f.c2 = c[2];
    f.slope = c[1];
    f.curvature = 2.0 * c[2];
    f.rms = std::sqrt((A * c - y).squaredNorm() / n);
    f.points = n;
    return f;
}

CurvatureFit branch_curvature_fit(const std::vector<const Branch*>& branches, const BifurcationReport& report,
                                  double s_fit, int pattern) {
    std::vector<double> s, k;
    for (const Branch* b : branches)
        for (const auto& pt : b->points) {
            const double a = branch_amplitude(report, pt.p, pattern);
            if (std::abs(a) <= s_fit && a != 0.0) {
                s.push_back(a);
                k.push_back(pt.kappa);
            }
        }
    if (s.size() < 8) throw InsufficientData("curvature fit needs at least 8 branch points within s_fit");
    return quadratic_fit(s, k);
}

CurvatureFit branch_curvature_fit(const Branch& branch, const BifurcationReport& report, double s_fit, int pattern) {
    return branch_curvature_fit(std::vector<const Branch*>{&branch}, report, s_fit, pattern);
}

}  // namespace mvbif
