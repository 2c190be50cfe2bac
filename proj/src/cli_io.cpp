#include "mvbif/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "mvbif/bifurcation.hpp"
#include "mvbif/continuation.hpp"
#include "mvbif/energy.hpp"
#include "mvbif/errors.hpp"
#include "mvbif/particles.hpp"
#include "mvbif/special_functions.hpp"

namespace mvbif {

using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
        throw InvalidInput("config key '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
        throw InvalidInput("config key '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

enum class Kind { number, integer, u64, flag, word, list, path };

const std::map<std::string, Kind>& kinds() {
    static const std::map<std::string, Kind> k{
        {"potential", Kind::word},     {"beta", Kind::number},        {"coefficients", Kind::list},
        {"coefficient_file", Kind::path}, {"n_w", Kind::integer},     {"N", Kind::integer},
        {"grid", Kind::integer},       {"kappa", Kind::number},       {"kappa_min", Kind::number},
        {"kappa_max", Kind::number},   {"kappa_step", Kind::number},  {"mode", Kind::integer},
        {"eps", Kind::number},         {"s_fit", Kind::number},       {"newton_tol", Kind::number},
        {"max_iter", Kind::integer},   {"h_init", Kind::number},      {"h_min", Kind::number},
        {"h_max", Kind::number},       {"max_points", Kind::integer}, {"output_modes", Kind::integer},
        {"branch", Kind::word},        {"source", Kind::word},        {"side_check", Kind::flag},
        {"classify", Kind::flag},      {"particles", Kind::integer},  {"t_final", Kind::number},
        {"dt", Kind::number},          {"burn_in", Kind::number},     {"sample_every", Kind::number},
        {"batches", Kind::integer},    {"seed", Kind::u64},           {"threads", Kind::integer},
    };
    return k;
}

std::string fmt(double x) { return format_number(x); }

// '#' header lines carrying version and resolved config
std::string header(const RunConfig& cfg, const std::string& command) {
    std::string h = "# mvbif " + std::string(kVersion) + " schema " + std::to_string(kSchemaVersion) + "\n";
    h += "# command: " + command + "\n";
    for (const auto& [k, v] : cfg.values()) h += "# config: " + k + "=" + v + "\n";
    return h;
}

json meta(const RunConfig& cfg, const std::string& command) {
    json m;
    m["version"] = kVersion;
    m["schema"] = kSchemaVersion;
    m["command"] = command;
    m["config"] = json(cfg.values());
    return m;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw InvalidInput("cannot write " + name + " in " + dir);
    f << content;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
    write_file(dir, name, j.dump(2) + "\n");
}

struct Csv {
    std::string text;
    explicit Csv(std::string head) : text(std::move(head)) {}
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
        text += "\n";
    }
};

int primary_mode(const PotentialSpectrum& W, const RunConfig& cfg) {
    int l = cfg.integer("mode");
    if (l > 0) return l;
    int best = 0;
    for (int k = 1; k <= W.size(); ++k)
        if (W.a(k) > 0 && (best == 0 || W.a(k) > W.a(best))) best = k;
    if (best == 0) throw InvalidInput("potential has no positive coefficient");
    return best;
}

double primary_kappa(const PotentialSpectrum& W) {
    const double a = W.max_coefficient();
    if (!(a > 0)) throw InvalidInput("potential has no positive coefficient");
    return 2.0 / a;
}

double or_auto(const RunConfig& cfg, const std::string& key, double fallback) {
    const double v = cfg.number(key);
    return v > 0 ? v : fallback;
}

json report_json(const BifurcationReport& r) {
    json j;
    j["kappa_star"] = num(r.kappa_star);
    j["level"] = num(r.level);
    j["modes"] = r.modes;
    j["periodicity"] = r.periodicity;
    j["signature"] = num(r.signature);
    j["curvature"] = num(r.curvature);
    j["slope"] = num(r.slope);
    j["kind"] = to_string(r.kind);
    j["modal_weights"] = r.modal_weights;
    j["sigma"] = r.sigma;
    j["sign_pattern"] = r.sign_pattern;
    j["ill_conditioned"] = r.ill_conditioned;
    j["note"] = r.note;
    return j;
}

BifurcationReport classify_found(const PotentialSpectrum& W, const BifurcationReport& f) {
    try {
        return classify(W, f);
    } catch (const NumericalError& e) {
        BifurcationReport r = f;
        r.note = e.what();
        return r;
    }
}

ContinuationControls continuation_controls(const RunConfig& cfg, double kappa_max) {
    ContinuationControls c;
    c.h_init = cfg.number("h_init");
    c.h_min = cfg.number("h_min");
    c.h_max = cfg.number("h_max");
    c.max_points = cfg.integer("max_points");
    c.newton.tol = cfg.number("newton_tol");
    c.kappa_max = kappa_max;
    c.trivial_stop = 1e-6;
    return c;
}

NewtonOptions newton_options(const RunConfig& cfg) {
    NewtonOptions o;
    o.tol = cfg.number("newton_tol");
    o.max_iter = cfg.integer("max_iter");
    return o;
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> d{
        {"potential", "transformer"}, {"beta", "1"},        {"coefficients", ""},    {"coefficient_file", ""},
        {"n_w", "64"},                {"N", "64"},          {"grid", "0"},           {"kappa", "0"},
        {"kappa_min", "0"},           {"kappa_max", "0"},   {"kappa_step", "0"},     {"mode", "0"},
        {"eps", "0.01"},              {"s_fit", "0.1"},    {"newton_tol", "1e-11"}, {"max_iter", "50"},
        {"h_init", "0.01"},           {"h_min", "1e-5"},    {"h_max", "0.05"},       {"max_points", "400"},
        {"output_modes", "8"},        {"branch", "plus"},   {"source", "newton"},    {"side_check", "true"},
        {"classify", "true"},         {"particles", "4000"}, {"t_final", "200"},     {"dt", "1e-3"},
        {"burn_in", "50"},            {"sample_every", "0.1"}, {"batches", "20"},    {"seed", "1"},
        {"threads", "1"},
    };
    return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw InvalidInput("unknown config key '" + key + "'");
    values_[key] = trim(value);
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidInput("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_double(key, get(key)); }

int RunConfig::integer(const std::string& key) const {
    const long long v = parse_integer(key, get(key));
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw InvalidInput("config key '" + key + "' out of range");
    return static_cast<int>(v);
}

std::uint64_t RunConfig::u64(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    if (v.empty() || v[0] == '-') throw InvalidInput("config key '" + key + "' expects an unsigned integer");
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE)
        throw InvalidInput("config key '" + key + "' expects an unsigned integer, got '" + v + "'");
    return x;
}

bool RunConfig::flag(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> RunConfig::list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

void RunConfig::validate() const {
    for (const auto& [key, kind] : kinds()) {
        switch (kind) {
            case Kind::number: number(key); break;
            case Kind::integer: integer(key); break;
            case Kind::u64: u64(key); break;
            case Kind::flag: flag(key); break;
            case Kind::list: list(key); break;
            case Kind::word:
            case Kind::path: break;
        }
    }
    const std::string pot = get("potential");
    if (pot != "transformer" && pot != "kuramoto" && pot != "logsine" && pot != "finite" && pot != "custom")
        throw InvalidInput("potential must be one of transformer, kuramoto, logsine, finite, custom");
    if (pot == "finite" && list("coefficients").empty()) throw InvalidInput("finite potential needs coefficients");
    if (pot == "custom" && get("coefficient_file").empty()) throw InvalidInput("custom potential needs coefficient_file");
    if (number("beta") <= 0) throw InvalidInput("beta must be positive");
    if (integer("N") < 1 || integer("N") > 4096) throw InvalidInput("N must be in [1, 4096]");
    if (integer("n_w") < 1 || integer("n_w") >= kMaxBesselOrder) throw InvalidInput("n_w must be in [1, 255]");
    if (integer("grid") != 0 && integer("grid") < 4 * integer("N")) throw InvalidInput("grid must be 0 or at least 4N");
    for (const char* k : {"kappa", "kappa_min", "kappa_max", "kappa_step", "mode", "eps", "s_fit"})
        if (number(k) < 0) throw InvalidInput(std::string(k) + " must be non-negative");
    for (const char* k : {"newton_tol", "h_init", "h_min", "h_max", "t_final", "dt", "sample_every"})
        if (!(number(k) > 0)) throw InvalidInput(std::string(k) + " must be positive");
    if (number("h_min") > number("h_max")) throw InvalidInput("h_min exceeds h_max");
    if (number("burn_in") < 0 || number("burn_in") >= number("t_final"))
        throw InvalidInput("burn_in must lie in [0, t_final)");
    for (const char* k : {"max_iter", "max_points", "particles", "threads", "output_modes"})
        if (integer(k) < 1) throw InvalidInput(std::string(k) + " must be at least 1");
    if (integer("batches") < 2) throw InvalidInput("batches must be at least 2");
    const std::string br = get("branch"), src = get("source");
    if (br != "plus" && br != "minus") throw InvalidInput("branch must be plus or minus");
    if (src != "newton" && src != "series") throw InvalidInput("source must be newton or series");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int n = 0;
    while (std::getline(ss, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(n) + " has no '='");
        cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    apply_config_text(cfg, ss.str());
}

void apply_environment(RunConfig& cfg, char** envp) {
    if (!envp) return;
    std::vector<std::pair<std::string, std::string>> found;
    for (char** e = envp; *e; ++e) {
        const std::string s = *e;
        if (s.rfind("MVBIF_", 0) != 0) continue;
        const auto eq = s.find('=');
        std::string key = s.substr(6, eq - 6), val = eq == std::string::npos ? "" : s.substr(eq + 1);
        // keys are matched case-insensitively, so N and n_w both work
        std::string match;
        for (const auto& [k, v] : cfg.values()) {
            std::string up = k;
            std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
            if (up == key) match = k;
        }
        if (match.empty()) throw InvalidInput("unknown config key in environment variable MVBIF_" + key);
        found.emplace_back(match, val);
    }
    std::sort(found.begin(), found.end());
    for (auto& [k, v] : found) cfg.set(k, v);
}

void apply_assignment(RunConfig& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
    cfg.set(trim(kv.substr(0, eq)), kv.substr(eq + 1));
}

PotentialSpectrum build_potential(const RunConfig& cfg) {
    const std::string pot = cfg.get("potential");
    if (pot == "transformer") return transformer_spectrum(cfg.number("beta"), cfg.integer("n_w"));
    if (pot == "kuramoto") return kuramoto_spectrum();
    if (pot == "logsine") return logsine_spectrum(2 * cfg.integer("N"));  // room for a_{2l} in signatures
    if (pot == "finite") return finite_spectrum(cfg.list("coefficients"));
    std::ifstream f(cfg.get("coefficient_file"));
    if (!f) throw InvalidInput("cannot read coefficient file " + cfg.get("coefficient_file"));
    std::vector<double> a;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (!line.empty()) a.push_back(parse_double("coefficient_file", line));
    }
    if (a.empty()) throw InvalidInput("coefficient file is empty");
    return finite_spectrum(a);
}

std::vector<std::string> cmd_spectrum(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const bool tr = cfg.get("potential") == "transformer";
    const double beta = cfg.number("beta");
    const int L = std::min(cfg.integer("N"), W.size());
    std::string head = "l,a,kappa_star,signature";
    if (tr) head += ",R_l,gap_exact,gap_predicted";
    Csv csv(header(cfg, "spectrum") + head + "\n");
    for (int l = 1; l <= L; ++l) {
        const double a = W.a(l), a2 = W.a(2 * l);
        const double ks = a > 0 ? 2.0 / a : std::numeric_limits<double>::quiet_NaN();
        const double sig = a > 0 && a != a2 ? (a - 2 * a2) / (a - a2) : std::numeric_limits<double>::quiet_NaN();
        std::vector<std::string> row{std::to_string(l), fmt(a), fmt(ks), fmt(sig)};
        if (tr) {
            row.push_back(fmt(signature_ratio_transformer(beta, l)));
            if (l < L) {
                row.push_back(fmt((a - W.a(l + 1)) / a));
                row.push_back(fmt((2.0 * l + 1) / (2 * beta)));
            } else {
                row.push_back("nan");
                row.push_back("nan");
            }
        }
        csv.row(row);
    }
    write_file(out, "spectrum.csv", csv.text);
    return {"spectrum.csv"};
}

std::vector<std::string> cmd_bifurcate(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const double kmax = or_auto(cfg, "kappa_max", 5 * primary_kappa(W));
    json j;
    j["meta"] = meta(cfg, "bifurcate");
    j["kappa_max"] = kmax;
    json pts = json::array();
    for (const auto& f : find_bifurcation_points(W, kmax)) pts.push_back(report_json(classify_found(W, f)));
    j["points"] = pts;
    write_json(out, "bifurcation.json", j);
    return {"bifurcation.json"};
}

std::vector<std::string> cmd_continue(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const int N = cfg.integer("N");
    const double kstar = primary_kappa(W);
    const double kmax = or_auto(cfg, "kappa_max", 1.5 * kstar);
    const int want = cfg.integer("mode");
    const int K = std::min(N, cfg.integer("output_modes"));
    const double eps = cfg.number("eps") > 0 ? cfg.number("eps") : 0.05;
    const ContinuationControls ctl = continuation_controls(cfg, kmax);
    SwitchOptions sw;
    sw.newton = newton_options(cfg);

    std::vector<std::string> files;
    json summary;
    summary["meta"] = meta(cfg, "continue");
    json list = json::array();
    for (const auto& f : find_bifurcation_points(W, kmax)) {
        if (want > 0 && std::find(f.modes.begin(), f.modes.end(), want) == f.modes.end()) continue;
        const BifurcationReport rep = classify_found(W, f);
        json entry;
        entry["report"] = report_json(rep);
        if (rep.kind == BifurcationKind::unclassified || rep.kind == BifurcationKind::multi_mode_infeasible) {
            entry["branches"] = json::array();
            list.push_back(entry);
            continue;
        }
        std::string tag;
        for (int m : rep.modes) tag += (tag.empty() ? "" : "-") + std::to_string(m);
        const bool trans = rep.kind == BifurcationKind::transcritical;
        std::vector<std::pair<int, double>> seeds;
        if (trans) {
            for (int pat = 0; pat < 4; ++pat) seeds.emplace_back(pat, eps), seeds.emplace_back(pat, -eps);
        } else {
            seeds = {{0, eps}, {0, -eps}};
        }
        std::vector<Branch> branches;
        json bl = json::array();
        for (const auto& [pat, e] : seeds) {
            sw.pattern = pat;
            json b;
            std::string name = "branch_" + tag + (trans ? "_p" + std::to_string(pat) : "") + (e > 0 ? "_plus" : "_minus") + ".csv";
            b["file"] = name;
            b["pattern"] = pat;
            b["eps"] = e;
            Branch br;
            try {
                const BranchPoint seed = switch_branch(rep, e, W, N, sw);
                Vec d = Vec::Zero(N + 1);
                d.head(N) = kernel_direction(rep, N, pat) * (e > 0 ? 1.0 : -1.0);
                br = continue_branch(seed, d, W, ctl);
            } catch (const NumericalError& err) {
                b["error"] = err.what();
                bl.push_back(b);
                continue;
            }
            br.provenance = trans ? Provenance::transcritical
                                  : (rep.modes.size() > 1 ? Provenance::multi_mode : Provenance::pitchfork);
            br.modes = rep.modes;
            std::string head = "index,arclength,kappa,amplitude,residual,norm";
            for (int l = 1; l <= K; ++l) head += ",p" + std::to_string(l);
            Csv csv(header(cfg, "continue") + "# branch: " + tag + " " + to_string(br.provenance) + "\n" + head + "\n");
            for (std::size_t i = 0; i < br.points.size(); ++i) {
                const auto& p = br.points[i];
                std::vector<std::string> row{std::to_string(i), fmt(p.s), fmt(p.kappa),
                                             fmt(branch_amplitude(rep, p.p, pat)), fmt(p.residual_norm),
                                             fmt(p.p.norm())};
                for (int l = 1; l <= K; ++l) row.push_back(fmt(p.p[l - 1]));
                csv.row(row);
            }
            write_file(out, name, csv.text);
            files.push_back(name);
            b["points"] = br.points.size();
            b["provenance"] = to_string(br.provenance);
            b["failed"] = br.failed;
            b["stop_reason"] = br.stop_reason;
            bl.push_back(b);
            if (!trans || pat == 0) branches.push_back(std::move(br));
        }
        entry["branches"] = bl;
        try {
            std::vector<const Branch*> ptr;
            for (auto& b : branches) ptr.push_back(&b);
            const CurvatureFit fit = branch_curvature_fit(ptr, rep, cfg.number("s_fit"));
            entry["fit"] = {{"c0", fit.c0}, {"slope", fit.slope}, {"curvature", fit.curvature},
                            {"rms", fit.rms}, {"points", fit.points}};
        } catch (const std::exception& e) {
            entry["fit"] = {{"error", e.what()}};
        }
        list.push_back(entry);
    }
    summary["bifurcations"] = list;
    write_json(out, "continue.json", summary);
    files.push_back("continue.json");
    return files;
}

std::vector<std::string> cmd_energy(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const int N = cfg.integer("N");
    const double ks = primary_kappa(W);
    const double lo = or_auto(cfg, "kappa_min", 0.5 * ks), hi = or_auto(cfg, "kappa_max", 1.5 * ks);
    const double step = or_auto(cfg, "kappa_step", 0.01 * ks);
    if (hi < lo) throw InvalidInput("kappa_max below kappa_min");
    EnergyControls ec;
    ec.minimize.grid = cfg.integer("grid");
    const EnergyScan sc = scan_m(W, N, lo, hi, step, ec);
    Csv csv(header(cfg, "energy") + "kappa,m,E,entropy,norm,kink\n");
    for (std::size_t i = 0; i < sc.kappa.size(); ++i)
        csv.row({fmt(sc.kappa[i]), fmt(sc.m[i]), fmt(sc.E[i]), fmt(sc.entropy[i]), fmt(sc.norm[i]),
                 sc.kink[i] ? "1" : "0"});
    write_file(out, "energy.csv", csv.text);
    json j;
    j["meta"] = meta(cfg, "energy");
    j["concave"] = sc.concave;
    j["max_second_difference"] = sc.max_second_difference;
    json co = json::array();
    for (const auto& c : sc.coexistence)
        co.push_back({{"kappa", c.kappa}, {"E_left", c.E_left}, {"E_right", c.E_right},
                      {"norm_left", c.left.norm()}, {"norm_right", c.right.norm()}});
    j["coexistence"] = co;
    if (cfg.flag("classify")) {
        const Transition t = classify_transition(W, N, ec);
        j["transition"] = {{"kappa_c", t.kappa_c}, {"kind", to_string(t.kind)}, {"kappa_star", t.kappa_star},
                           {"norm_at", t.norm_at}};
    }
    write_json(out, "energy.json", j);
    return {"energy.csv", "energy.json"};
}

std::vector<std::string> cmd_density(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const int N = cfg.integer("N");
    const int m = primary_mode(W, cfg);
    const double am = W.a(m);
    if (!(am > 0)) throw InvalidInput("selected mode has a non-positive coefficient");
    const double km = 2.0 / am;
    const double sig = (am - 2 * W.a(2 * m)) / (am - W.a(2 * m));
    const double kappa = or_auto(cfg, "kappa", km * (sig >= 0 ? 1.01 : 0.99));
    const int M = cfg.integer("grid") > 0 ? cfg.integer("grid") : default_grid(N);
    const bool plus = cfg.get("branch") == "plus";
    const SeriesSolution s = series_density(W, m, kappa, N, 12, cfg.flag("side_check"));
    ModeVector p = plus ? s.modes_plus : s.modes_minus;
    double res = residual(p, kappa, W).cwiseAbs().maxCoeff();
    if (cfg.get("source") == "newton") {
        const BranchPoint b = newton_solve(p, kappa, W, newton_options(cfg));
        p = b.p;
        res = b.residual_norm;
    }
    const DensityProfile d = fixed_point_map(p, kappa, W, M);
    Csv csv(header(cfg, "density") + "# kappa: " + fmt(kappa) + "\n# mode: " + std::to_string(m) +
            "\n# amplitude: " + fmt(plus ? s.s_plus : s.s_minus) + "\n# residual: " + fmt(res) + "\ntheta,rho\n");
    for (int j = 0; j < d.size(); ++j)
        csv.row({fmt(d.theta[static_cast<std::size_t>(j)]), fmt(d.values[static_cast<std::size_t>(j)])});
    write_file(out, "density.csv", csv.text);
    return {"density.csv"};
}

std::vector<std::string> cmd_simulate(const RunConfig& cfg, const std::string& out) {
    const PotentialSpectrum W = build_potential(cfg);
    const int N = cfg.integer("N");
    const double kappa = or_auto(cfg, "kappa", 1.25 * primary_kappa(W));
    SimulationControls sc;
    sc.particles = cfg.integer("particles");
    sc.t_final = cfg.number("t_final");
    sc.dt = cfg.number("dt");
    sc.burn_in = cfg.number("burn_in");
    sc.sample_every = cfg.number("sample_every");
    sc.batches = cfg.integer("batches");
    sc.seed = cfg.u64("seed");
    sc.threads = cfg.integer("threads");
    const Minimizer sol = minimize_energy(kappa, W, N);
    const StationaryReport r = stationary_compare(kappa, W, sol.p, sc);
    Csv csv(header(cfg, "simulate") + "t,p1,p2,energy\n");
    for (const auto& s : r.trajectory) csv.row({fmt(s.t), fmt(s.p1), fmt(s.p2), fmt(s.energy)});
    write_file(out, "trajectory.csv", csv.text);
    json j;
    j["meta"] = meta(cfg, "simulate");
    j["kappa"] = kappa;
    j["solver_p1"] = r.solver_p1;
    j["mean_p1"] = r.mean_p1;
    j["standard_error"] = r.standard_error;
    j["z_score"] = r.z_score;
    j["samples"] = r.samples;
    j["within_3se"] = std::abs(r.z_score) < 3;
    write_json(out, "simulate.json", j);
    return {"trajectory.csv", "simulate.json"};
}

int cli_main(int argc, char** argv, char** envp) {
    CLI::App app{"Stationary states and bifurcations of McKean-Vlasov equations on the circle", "mvbif"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);
    std::string config_path, out_dir = ".";
    std::vector<std::string> sets;
    std::string seed, threads;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", sets, "override a config key, key=value (repeatable)")->take_all();
    app.add_option("--seed", seed, "simulation seed");
    app.add_option("--threads", threads, "worker threads");
    app.fallthrough();
    const std::vector<std::pair<std::string, std::string>> verbs{
        {"spectrum", "coefficient table"},      {"bifurcate", "bifurcation points and classification"},
        {"continue", "continue bifurcating branches"}, {"energy", "free-energy scan and transition"},
        {"density", "bifurcating density profile"},    {"simulate", "particle simulation vs solver"}};
    for (const auto& [v, d] : verbs) app.add_subcommand(v, d);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        apply_environment(cfg, envp);
        for (const auto& s : sets) apply_assignment(cfg, s);
        if (!seed.empty()) cfg.set("seed", seed);
        if (!threads.empty()) cfg.set("threads", threads);
        cfg.validate();
        std::vector<std::string> files;
        if (verb == "spectrum") files = cmd_spectrum(cfg, out_dir);
        else if (verb == "bifurcate") files = cmd_bifurcate(cfg, out_dir);
        else if (verb == "continue") files = cmd_continue(cfg, out_dir);
        else if (verb == "energy") files = cmd_energy(cfg, out_dir);
        else if (verb == "density") files = cmd_density(cfg, out_dir);
        else files = cmd_simulate(cfg, out_dir);
        for (const auto& f : files) std::cout << (std::filesystem::path(out_dir) / f).string() << "\n";
        return 0;
    } catch (const InvalidInput& e) {
        std::cerr << "mvbif: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "mvbif: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "mvbif: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace mvbif
