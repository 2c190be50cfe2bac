#include "mvbif/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mvbif/errors.hpp"

namespace mvbif {

std::string to_string(BifurcationKind k) {
    switch (k) {
        case BifurcationKind::unclassified: return "unclassified";
        case BifurcationKind::supercritical_pitchfork: return "supercritical_pitchfork";
        case BifurcationKind::subcritical_pitchfork: return "subcritical_pitchfork";
        case BifurcationKind::critical: return "critical";
        case BifurcationKind::transcritical: return "transcritical";
        case BifurcationKind::multi_mode_pitchfork: return "multi_mode_pitchfork";
        case BifurcationKind::multi_mode_infeasible: return "multi_mode_infeasible";
    }
    return "unclassified";
}

namespace {

bool coincident(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max(std::abs(x), std::abs(y));
}

int gcd_of(const std::vector<int>& v) {
    int g = 0;
    for (int x : v) g = std::gcd(g, x);
    return g == 0 ? 1 : g;
}

}  // namespace

std::vector<BifurcationReport> find_bifurcation_points(const PotentialSpectrum& W, double kappa_max,
                                                       const BifurcationOptions& opt) {
    if (!(kappa_max > 0)) throw InvalidInput("kappa_max must be positive");
    std::vector<int> pos;
    for (int l = 1; l <= W.size(); ++l)
        if (W.a(l) > 0) pos.push_back(l);
    std::stable_sort(pos.begin(), pos.end(), [&](int i, int j) { return W.a(i) > W.a(j); });
    std::vector<BifurcationReport> out;
    std::size_t i = 0;
    while (i < pos.size()) {
        const double head = W.a(pos[i]);
        BifurcationReport r;
        r.level = head;
        r.kappa_star = 2.0 / head;
        while (i < pos.size() && coincident(W.a(pos[i]), head, opt.coincidence_tol)) r.modes.push_back(pos[i++]);
        if (r.kappa_star > kappa_max) break;
        std::sort(r.modes.begin(), r.modes.end());
        r.periodicity = gcd_of(r.modes);
        out.push_back(std::move(r));
    }
    return out;
}

BifurcationReport classify_single_mode(const PotentialSpectrum& W, int lstar, const BifurcationOptions& opt) {
    const double a = W.a(lstar);
    if (lstar < 1 || !(a > 0)) throw InvalidInput("classify_single_mode needs a positive coefficient a_l*");
    for (int j = 1; j <= W.size(); ++j)
        if (j != lstar && coincident(W.a(j), a, opt.coincidence_tol))
            throw Degenerate("mode " + std::to_string(j) + " coincides with mode " + std::to_string(lstar) +
                             "; use the multi-mode path");
    BifurcationReport r;
    r.level = a;
    r.kappa_star = 2.0 / a;
    r.modes = {lstar};
    r.periodicity = lstar;
    const double a2 = W.a(2 * lstar);
    r.signature = (a - 2 * a2) / (a - a2);
    r.curvature = (2.0 / a) * r.signature;
    r.slope = 0.0;
    r.ill_conditioned = std::abs(a - a2) < opt.conditioning_tol * a;
    if (std::abs(r.signature) <= opt.critical_tol)
        r.kind = BifurcationKind::critical;
    else
        r.kind = r.signature > 0 ? BifurcationKind::supercritical_pitchfork : BifurcationKind::subcritical_pitchfork;
    return r;
}

int violated_resonance_condition(const std::vector<int>& L) {
    const std::set<int> S(L.begin(), L.end());
    const std::size_t k = L.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (S.count(L[i] + L[j])) return 1;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t r = 0; r < k; ++r)
                if (S.count(L[i] + L[j] + L[r])) return 2;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t t = r; t < k; ++t)
                    if (L[i] + L[j] == L[r] + L[t] && !(i == r && j == t)) return 3;
    return 0;
}

namespace {

// Entry (i, j) with level a in that row; NaN when a denominator vanishes.
double b_entry(const PotentialSpectrum& W, int li, int lj, double a, double den_tol) {
    auto ratio = [&](double num, double den) {
        return std::abs(den) <= den_tol * std::abs(a) ? std::numeric_limits<double>::quiet_NaN() : num / den;
    };
    if (li == lj) return ratio(a - 2 * W.a(2 * li), a - W.a(2 * li));
    const double first = ratio(lj * a - (li + lj) * W.a(li + lj), a - W.a(li + lj));
    if (li < lj) {
        const int d = lj - li;
        return (2.0 / li) * (first + ratio(d * W.a(d) - lj * a, a - W.a(d)));
    }
    const int d = li - lj;
    return (2.0 / li) * (first - ratio(d * W.a(d) + lj * a, a - W.a(d)));
}

BMatrix assemble(const PotentialSpectrum& W, const std::vector<int>& modes, const std::vector<double>& levels,
                 double den_tol) {
    BMatrix M;
    M.modes = modes;
    M.row_levels = levels;
    M.level = levels.empty() ? 0.0 : levels.front();
    const int k = static_cast<int>(modes.size());
    M.B = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            M.B(i, j) = b_entry(W, modes[static_cast<std::size_t>(i)], modes[static_cast<std::size_t>(j)],
                                levels[static_cast<std::size_t>(i)], den_tol);
            if (std::isnan(M.B(i, j))) M.degenerate_entries.emplace_back(i, j);
        }
    return M;
}

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.empty() || v.front() < 1) throw InvalidInput("mode set must be non-empty positive integers");
    return v;
}

}  // namespace

BMatrix build_b_matrix(const PotentialSpectrum& W, const std::vector<int>& modes_in, const BifurcationOptions& opt) {
    const auto modes = sorted_unique(modes_in);
    const double a = W.a(modes.front());
    if (!(a > 0)) throw InvalidInput("B-matrix level must be positive");
    for (int l : modes)
        if (!coincident(W.a(l), a, opt.coincidence_tol))
            throw InvalidInput("modes are not coincident at a common level");
    if (int c = violated_resonance_condition(modes))
        throw ResonanceDetected("no-resonance condition (" + std::string(c == 1 ? "i" : c == 2 ? "ii" : "iii") +
                                ") fails; use the resonance path");
    BMatrix M = assemble(W, modes, std::vector<double>(modes.size(), a), opt.coincidence_tol);
    if (!M.degenerate_entries.empty()) throw Degenerate("B-matrix denominator vanishes at this level");
    return M;
}

BMatrix build_b_matrix_clustered(const PotentialSpectrum& W, const std::vector<int>& modes_in,
                                 const BifurcationOptions& opt) {
    const auto modes = sorted_unique(modes_in);
    std::vector<double> levels;
    for (int l : modes) {
        if (!(W.a(l) > 0)) throw InvalidInput("clustered B-matrix needs positive coefficients");
        levels.push_back(W.a(l));
    }
    (void)opt;
    return assemble(W, modes, levels, 1e-14);
}

ModalWeights multi_mode_weights(const BMatrix& B, const std::vector<int>& subset, const BifurcationOptions& opt) {
    if (subset.empty()) throw InvalidInput("empty mode subset");
    const int m = static_cast<int>(subset.size());
    Mat S(m, m);
    for (int r = 0; r < m; ++r)
        for (int t = 0; t < m; ++t) {
            const int i = subset[static_cast<std::size_t>(r)], j = subset[static_cast<std::size_t>(t)];
            if (i < 0 || j < 0 || i >= B.B.rows() || j >= B.B.rows()) throw InvalidInput("subset index out of range");
            S(r, t) = B.B(i, j);
        }
    if (!S.allFinite()) throw Degenerate("B submatrix has undefined entries");
    Eigen::JacobiSVD<Mat> svd(S);
    const auto& sv = svd.singularValues();
    if (sv(m - 1) <= opt.rcond_min * sv(0) || sv(0) == 0.0) throw Degenerate("B submatrix is singular");
    ModalWeights w;
    w.subset = subset;
    w.level = B.row_levels.empty() ? B.level : B.row_levels[static_cast<std::size_t>(subset.front())];
    w.x = S.fullPivLu().solve(Vec::Ones(m));
    const bool all_pos = (w.x.array() > 0).all(), all_neg = (w.x.array() < 0).all();
    w.feasible = all_pos || all_neg;
    if (w.feasible) {
        w.sigma = all_pos ? 1 : -1;
        for (int r = 0; r < m; ++r) w.b.push_back(std::sqrt(std::abs(w.x[r])));
    }
    return w;
}

ModeVector TranscriticalBranch::direction(int N) const {
    ModeVector d = ModeVector::Zero(N);
    for (int i = 0; i < 3; ++i) {
        if (modes[static_cast<std::size_t>(i)] > N) throw InvalidInput("truncation smaller than resonance modes");
        d[modes[static_cast<std::size_t>(i)] - 1] = sigma[static_cast<std::size_t>(i)];
    }
    return d;
}

std::vector<TranscriticalBranch> resonance_branches(const PotentialSpectrum& W, int l, int m,
                                                    const BifurcationOptions& opt) {
    if (!(m >= 1 && m < l)) throw NotResonant("resonance triple needs 1 <= m < l");
    if (l == 2 * m) throw NotResonant("resonance triple with l = 2m is excluded");
    const double a = W.a(l);
    if (!(a > 0)) throw NotResonant("resonance level must be positive");
    if (!coincident(W.a(m), a, opt.coincidence_tol) || !coincident(W.a(l + m), a, opt.coincidence_tol))
        throw NotResonant("a_l, a_m, a_{l+m} are not equal");
    for (int j = 1; j <= W.size(); ++j) {
        if (j == l || j == m || j == l + m) continue;
        if (!(W.a(j) < a * (1 - opt.coincidence_tol))) throw NotResonant("another coefficient reaches the resonance level");
    }
    std::vector<TranscriticalBranch> out;
    for (auto s : {std::array<int, 3>{1, 1, 1}, std::array<int, 3>{1, -1, -1}, std::array<int, 3>{-1, 1, -1},
                   std::array<int, 3>{-1, -1, 1}}) {
        TranscriticalBranch b;
        b.modes = {l, m, l + m};
        b.sigma = s;
        b.level = a;
        out.push_back(b);
    }
    return out;
}

BifurcationReport classify(const PotentialSpectrum& W, const BifurcationReport& found, const BifurcationOptions& opt) {
    if (found.modes.empty()) throw InvalidInput("report has no modes");
    if (found.modes.size() == 1) {
        BifurcationReport r = classify_single_mode(W, found.modes.front(), opt);
        return r;
    }
    BifurcationReport r = found;
    r.level = W.a(found.modes.front());
    r.kappa_star = 2.0 / r.level;
    r.periodicity = gcd_of(r.modes);
    if (r.modes.size() == 3 && r.modes[0] + r.modes[1] == r.modes[2]) {
        const int m = r.modes[0], l = r.modes[1];
        try {
            auto br = resonance_branches(W, l, m, opt);
            r.kind = BifurcationKind::transcritical;
            r.slope = -2.0 / r.level;
            r.sign_pattern.assign(br.front().sigma.begin(), br.front().sigma.end());
            return r;
        } catch (const NotResonant& e) {
            r.note = e.what();
        }
    }
    try {
        BMatrix B = build_b_matrix(W, r.modes, opt);
        std::vector<int> all(r.modes.size());
        std::iota(all.begin(), all.end(), 0);
        ModalWeights w = multi_mode_weights(B, all, opt);
        if (w.feasible) {
            r.kind = BifurcationKind::multi_mode_pitchfork;
            r.modal_weights = w.b;
            r.sigma = w.sigma;
            r.curvature = (2.0 / r.level) * w.sigma;
            r.slope = 0.0;
        } else {
            r.kind = BifurcationKind::multi_mode_infeasible;
        }
    } catch (const NumericalError& e) {
        r.kind = BifurcationKind::unclassified;
        r.note += (r.note.empty() ? "" : "; ") + std::string(e.what());
    }
    return r;
}

PotentialSpectrum decimate(const PotentialSpectrum& W, int m) {
    if (m < 1) throw InvalidInput("decimation factor must be >= 1");
    std::vector<double> a;
    for (int l = 1; l * m <= W.size(); ++l) a.push_back(W.a(l * m));
    return PotentialSpectrum(std::move(a), W.tail_bound * m, W.name);
}

PeriodicityPrediction periodicity_prediction(const PotentialSpectrum& W, const BifurcationReport& report, int N) {
    PeriodicityPrediction p;
    p.g = gcd_of(report.modes);
    p.forced_zero.assign(static_cast<std::size_t>(N), false);
    for (int l = 1; l <= N; ++l) p.forced_zero[static_cast<std::size_t>(l - 1)] = (l % p.g) != 0;
    p.decimated = decimate(W, p.g);
    return p;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw InvalidInput("zero denominator");
    if (den < 0) num = -num, den = -den;
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    return {num / (g ? g : 1), den / (g ? g : 1)};
}

std::pair<Rational, Rational> modal_weight_limits(int l1, int l2) {
    const std::int64_t a = l1, b = l2;
    const std::int64_t a2 = a * a, b2 = b * b;
    const std::int64_t den = 8 * a2 * a2 + 254 * a2 * b2 + 8 * b2 * b2;
    const std::int64_t n1 = -12 * a2 * a2 * a2 + 15 * a2 * a2 * b2 + 132 * a2 * b2 * b2;
    const std::int64_t n2 = 132 * a2 * a2 * b2 + 15 * a2 * b2 * b2 - 12 * b2 * b2 * b2;
    return {make_rational(n1, den), make_rational(n2, den)};
}

}  // namespace mvbif
