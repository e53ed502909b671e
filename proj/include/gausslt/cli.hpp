#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausslt/covariance.hpp"
#include "gausslt/csv.hpp"
#include "gausslt/errors.hpp"
#include "gausslt/field.hpp"
#include "gausslt/lemma_verify.hpp"
#include "gausslt/moments.hpp"
#include "gausslt/pathsim.hpp"
#include "gausslt/ratelab.hpp"

namespace gausslt {

using json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

enum ExitCode : int {
    EXIT_OK = 0,
    EXIT_OTHER = 1,
    EXIT_CONFIG = 2,
    EXIT_PRECONDITION = 3,
    EXIT_CONVERGENCE = 4,
};

enum class Subcommand { LEMMA_VERIFY, P2_PROBE, MOMENT, SIMULATE, SWEEP, FIT, XSHAPE };
enum class Verbosity { QUIET, NORMAL, VERBOSE };
enum class MomentMethod { GENERAL, AT_ZERO, AUTO };

inline const std::vector<std::pair<std::string, Subcommand>>& subcommand_names() {
    static const std::vector<std::pair<std::string, Subcommand>> names = {
        {"lemma-verify", Subcommand::LEMMA_VERIFY}, {"p2-probe", Subcommand::P2_PROBE},
        {"moment", Subcommand::MOMENT},             {"simulate", Subcommand::SIMULATE},
        {"sweep", Subcommand::SWEEP},               {"fit", Subcommand::FIT},
        {"xshape", Subcommand::XSHAPE},
    };
    return names;
}

inline std::string to_string(Subcommand s) {
    for (const auto& [n, v] : subcommand_names())
        if (v == s) return n;
    return "?";
}

inline Subcommand parse_subcommand(const std::string& s) {
    for (const auto& [n, v] : subcommand_names())
        if (n == s) return v;
    throw ConfigError("unknown subcommand '" + s + "'");
}

struct RunConfig {
    Subcommand subcommand = Subcommand::MOMENT;
    FieldSpec spec;
    std::filesystem::path outPath;
    std::uint64_t seed = kDefaultSeed;
    Verbosity verbosity = Verbosity::NORMAL;
    unsigned jobs = 0;

    QuadPlan quad;
    MomentMethod method = MomentMethod::GENERAL;
    int count = 200;                 // lemma-verify draws per lemma
    std::size_t n = 256;             // simulate / MC grid size
    std::size_t M = 2000;            // MC replicates
    TimeRule rule = TimeRule::Trapezoid;
    std::vector<double> epsList;     // sweep
    MomentSource source = MomentSource::QUAD;
    double minQuadEps = 1e-4;
    std::vector<double> gammas = {2, 4, 8, 16, 32, 64};
    std::size_t probeN = 2048;
    CovarianceModel probeModel = CovarianceModel::fbm(0.5);
    std::vector<double> xMagnitudes = {0.0, 0.5, 1.0, 1.5};
    std::filesystem::path inputPath; // fit
    json canonical;                  // merged configuration, for hashing
};

namespace detail {

inline const std::set<std::string>& top_level_keys() {
    static const std::set<std::string> keys = {
        "H1",     "H2",    "model1",   "model2",      "d",       "k",      "x",     "T",
        "eps",    "seed",  "out",      "jobs",        "verbosity", "quad", "method", "count",
        "n",      "M",     "rule",     "eps_list",    "source",  "min_quad_eps", "gammas", "probe_n",
        "model",  "x_magnitudes", "input",
    };
    return keys;
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("unknown key '" + it.key() + "' in " + where + " (allowed: " + list + ")");
        }
}

inline double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
    return j.get<double>();
}

inline long long get_integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return j.get<long long>();
}

inline std::size_t get_count(const json& j, const std::string& key, long long minimum) {
    const long long v = get_integer(j, key);
    if (v < minimum) throw ConfigError("'" + key + "' must be >= " + std::to_string(minimum) + ", got " + std::to_string(v));
    return std::size_t(v);
}

inline std::vector<double> get_number_list(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(get_number(e, key + "[]"));
    return out;
}

inline std::string get_string(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
    return j.get<std::string>();
}

inline std::uint64_t parse_seed(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) throw ConfigError("'seed' must be non-negative");
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos, 0);
            if (pos == s.size() && !s.empty() && s[0] != '-') return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("'seed' string '" + s + "' is not a decimal or 0x-prefixed integer");
    }
    throw ConfigError("'seed' must be an integer or an integer string");
}

inline void check_unit_interval(double v, const std::string& name, bool closedRight = false) {
    const bool ok = v > 0.0 && (closedRight ? v <= 1.0 : v < 1.0);
    if (!ok) {
        std::ostringstream m;
        m << name << " = " << v << " is outside the (P1) range " << (closedRight ? "(0,1]" : "(0,1)");
        throw ConfigError(m.str());
    }
}

inline CovarianceModel parse_model(const json& j, const std::string& name) {
    if (!j.is_object()) throw ConfigError("'" + name + "' must be an object with a 'kind'");
    reject_unknown(j, {"kind", "H", "H0", "K0"}, "'" + name + "'");
    if (!j.contains("kind")) throw ConfigError("'" + name + "' needs a 'kind' (fbm, bifbm or subfbm)");
    const std::string kind = get_string(j["kind"], name + ".kind");
    auto need = [&](const char* key) {
        if (!j.contains(key)) throw ConfigError("'" + name + "' of kind " + kind + " needs '" + key + "'");
        return get_number(j[key], name + "." + key);
    };
    auto forbid = [&](const char* key) {
        if (j.contains(key)) throw ConfigError("'" + name + "' of kind " + kind + " does not take '" + key + "'");
    };
    if (kind == "fbm" || kind == "subfbm") {
        forbid("H0");
        forbid("K0");
        const double H = need("H");
        check_unit_interval(H, name + ".H");
        return kind == "fbm" ? CovarianceModel::fbm(H) : CovarianceModel::subfbm(H);
    }
    if (kind == "bifbm") {
        forbid("H");
        const double H0 = need("H0"), K0 = need("K0");
        check_unit_interval(H0, name + ".H0");
        check_unit_interval(K0, name + ".K0", true);
        return CovarianceModel::bifbm(H0, K0);
    }
    throw ConfigError("'" + name + "'.kind must be fbm, bifbm or subfbm, got '" + kind + "'");
}

inline CovarianceModel parse_process(const json& cfg, const std::string& shorthand, const std::string& full) {
    if (cfg.contains(shorthand) && cfg.contains(full))
        throw ConfigError("give either '" + shorthand + "' or '" + full + "', not both");
    if (cfg.contains(shorthand)) {
        const double H = get_number(cfg[shorthand], shorthand);
        check_unit_interval(H, shorthand);
        return CovarianceModel::fbm(H);
    }
    if (cfg.contains(full)) return parse_model(cfg[full], full);
    return CovarianceModel::fbm(0.5);
}

inline FieldSpec parse_field(const json& cfg) {
    FieldSpec s;
    s.model1 = parse_process(cfg, "H1", "model1");
    s.model2 = parse_process(cfg, "H2", "model2");

    std::optional<std::size_t> d;
    if (cfg.contains("d")) d = get_count(cfg["d"], "d", 1);
    if (cfg.contains("k")) {
        if (!cfg["k"].is_array() || cfg["k"].empty()) throw ConfigError("'k' must be a non-empty array of integers");
        std::vector<int> k;
        for (const auto& e : cfg["k"]) {
            const long long v = get_integer(e, "k[]");
            if (v < 0) throw ConfigError("'k' entries must be >= 0, got " + std::to_string(v));
            if (v > kMaxLemmaOrder)
                throw ConfigError("'k' entries must be <= " + std::to_string(kMaxLemmaOrder) + ", got " +
                                  std::to_string(v));
            k.push_back(int(v));
        }
        if (d && *d != k.size())
            throw ConfigError("k has " + std::to_string(k.size()) + " entries but d = " + std::to_string(*d));
        s.k = MultiIndex(k);
    } else {
        s.k = MultiIndex::zeros(d.value_or(1));
    }
    if (cfg.contains("x")) {
        s.x = get_number_list(cfg["x"], "x");
        if (s.x.size() != s.k.dim())
            throw ConfigError("x has " + std::to_string(s.x.size()) + " coordinates but d = " +
                              std::to_string(s.k.dim()));
    } else {
        s.x.assign(s.k.dim(), 0.0);
    }
    if (cfg.contains("T")) s.T = get_number(cfg["T"], "T");
    if (cfg.contains("eps")) s.eps = get_number(cfg["eps"], "eps");
    try {
        s.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

inline QuadPlan parse_quad(const json& j) {
    if (!j.is_object()) throw ConfigError("'quad' must be an object");
    reject_unknown(j, {"order", "sublevels", "rel_tol", "abs_tol", "max_refinements"}, "'quad'");
    QuadPlan p;
    if (j.contains("order")) p.order = int(get_count(j["order"], "quad.order", 1));
    if (j.contains("sublevels")) p.sublevels = int(get_count(j["sublevels"], "quad.sublevels", 0));
    if (j.contains("rel_tol")) p.relTol = get_number(j["rel_tol"], "quad.rel_tol");
    if (j.contains("abs_tol")) p.absTol = get_number(j["abs_tol"], "quad.abs_tol");
    if (j.contains("max_refinements"))
        p.maxRefinements = int(get_count(j["max_refinements"], "quad.max_refinements", 1));
    if (!(p.relTol > 0.0)) throw ConfigError("quad.rel_tol must be > 0");
    if (p.absTol < 0.0) throw ConfigError("quad.abs_tol must be >= 0");
    return p;
}

}  // namespace detail

/// Applies `overrides` on top of `file` key by key (nested objects merge).
inline json merge_config(json file, const json& overrides) {
    if (file.is_null()) file = json::object();
    if (!file.is_object()) throw ConfigError("configuration must be a JSON object");
    file.merge_patch(overrides);
    return file;
}

inline json load_config_file(const std::filesystem::path& p) {
    const std::string text = read_file(p);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + p.string() + ": " + e.what());
    }
}

/// Validates a merged configuration for one subcommand.
inline RunConfig parse_config(Subcommand sub, const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("configuration must be a JSON object");
    detail::reject_unknown(cfg, detail::top_level_keys(), "configuration");
    RunConfig rc;
    rc.subcommand = sub;
    rc.canonical = cfg;
    rc.spec = detail::parse_field(cfg);
    rc.outPath = cfg.contains("out") ? std::filesystem::path(detail::get_string(cfg["out"], "out"))
                                     : std::filesystem::path(to_string(sub) + ".csv");
    if (rc.outPath.empty()) throw ConfigError("'out' must not be empty");
    if (cfg.contains("seed")) rc.seed = detail::parse_seed(cfg["seed"]);
    if (cfg.contains("jobs")) rc.jobs = unsigned(detail::get_count(cfg["jobs"], "jobs", 1));
    if (cfg.contains("verbosity")) {
        const auto v = detail::get_string(cfg["verbosity"], "verbosity");
        if (v == "quiet") rc.verbosity = Verbosity::QUIET;
        else if (v == "normal") rc.verbosity = Verbosity::NORMAL;
        else if (v == "verbose") rc.verbosity = Verbosity::VERBOSE;
        else throw ConfigError("'verbosity' must be quiet, normal or verbose");
    }
    if (cfg.contains("quad")) rc.quad = detail::parse_quad(cfg["quad"]);
    if (cfg.contains("method")) {
        const auto m = detail::get_string(cfg["method"], "method");
        if (m == "general") rc.method = MomentMethod::GENERAL;
        else if (m == "at_zero") rc.method = MomentMethod::AT_ZERO;
        else if (m == "auto") rc.method = MomentMethod::AUTO;
        else throw ConfigError("'method' must be general, at_zero or auto");
        if (rc.method == MomentMethod::AT_ZERO && !rc.spec.x_is_zero())
            throw ConfigError("method at_zero needs x = 0");
    }
    if (cfg.contains("count")) rc.count = int(detail::get_count(cfg["count"], "count", 1));
    if (cfg.contains("n")) rc.n = detail::get_count(cfg["n"], "n", 2);
    if (cfg.contains("M")) rc.M = detail::get_count(cfg["M"], "M", 2);
    if (cfg.contains("rule")) {
        const auto r = detail::get_string(cfg["rule"], "rule");
        if (r == "trapezoid") rc.rule = TimeRule::Trapezoid;
        else if (r == "midpoint") rc.rule = TimeRule::Midpoint;
        else throw ConfigError("'rule' must be trapezoid or midpoint");
    }
    if (rc.rule == TimeRule::Midpoint && rc.n % 2 != 0) throw ConfigError("midpoint rule needs an even n");
    if (cfg.contains("eps_list")) rc.epsList = detail::get_number_list(cfg["eps_list"], "eps_list");
    if (cfg.contains("source")) {
        const auto s = detail::get_string(cfg["source"], "source");
        if (s == "QUAD" || s == "quad") rc.source = MomentSource::QUAD;
        else if (s == "MC" || s == "mc") rc.source = MomentSource::MC;
        else throw ConfigError("'source' must be QUAD or MC");
    }
    if (cfg.contains("min_quad_eps")) {
        rc.minQuadEps = detail::get_number(cfg["min_quad_eps"], "min_quad_eps");
        if (!(rc.minQuadEps > 0.0)) throw ConfigError("'min_quad_eps' must be > 0");
    }
    if (cfg.contains("gammas")) rc.gammas = detail::get_number_list(cfg["gammas"], "gammas");
    if (cfg.contains("probe_n")) rc.probeN = detail::get_count(cfg["probe_n"], "probe_n", 8);
    if (cfg.contains("model")) rc.probeModel = detail::parse_model(cfg["model"], "model");
    else rc.probeModel = rc.spec.model1;
    if (cfg.contains("x_magnitudes")) rc.xMagnitudes = detail::get_number_list(cfg["x_magnitudes"], "x_magnitudes");
    if (cfg.contains("input")) rc.inputPath = detail::get_string(cfg["input"], "input");

    switch (sub) {
        case Subcommand::SWEEP: {
            if (rc.epsList.empty()) throw ConfigError("sweep needs 'eps_list' (or --eps a,b,c)");
            for (std::size_t i = 0; i < rc.epsList.size(); ++i) {
                if (!(rc.epsList[i] > 0.0)) throw ConfigError("eps must be > 0 in eps_list");
                if (i > 0 && !(rc.epsList[i] < rc.epsList[i - 1]))
                    throw ConfigError("eps_list must be strictly decreasing");
            }
            if (exists_in_L2(RateSpec::from(rc.spec)))
                throw ConfigError("sweep needs theta >= 1; this spec has theta = " +
                                  std::to_string(RateSpec::from(rc.spec).theta()) + " (derivative exists, no rate)");
            break;
        }
        case Subcommand::FIT:
            if (rc.inputPath.empty()) throw ConfigError("fit needs 'input' (a sweep CSV)");
            break;
        case Subcommand::P2_PROBE:
            if (rc.gammas.empty()) throw ConfigError("'gammas' must not be empty");
            for (double g : rc.gammas)
                if (!(g > 1.0)) throw ConfigError("every gamma must be > 1");
            break;
        case Subcommand::XSHAPE:
            if (rc.xMagnitudes.size() < 2) throw ConfigError("'x_magnitudes' needs at least two values");
            for (double v : rc.xMagnitudes)
                if (v < 0.0) throw ConfigError("'x_magnitudes' must be >= 0");
            break;
        default:
            break;
    }
    return rc;
}

/// Hash of the spec-defining part of a configuration (output keys excluded).
inline std::string spec_hash(const RunConfig& rc) {
    json c = rc.canonical;
    for (const char* k : {"out", "jobs", "verbosity"}) c.erase(k);
    return hex64(fnv1a(c.dump()));
}

namespace detail {

inline void summary(const RunConfig& rc, std::ostream& os, const std::string& line) {
    if (rc.verbosity != Verbosity::QUIET) os << to_string(rc.subcommand) << ": " << line << "\n";
}

inline std::string lemma_verify_csv(const std::vector<LemmaCheck>& rows) {
    std::string out = "lemma,k,a,b,c,a2,b2,c2,eps,x,closed,oracle,relerr\n";
    for (const auto& r : rows) {
        const auto& p = r.params;
        out += join_csv({to_string(r.kind), std::to_string(p.k), fmt_double(p.a), fmt_double(p.b), fmt_double(p.c),
                         fmt_double(p.a2), fmt_double(p.b2), fmt_double(p.c2), fmt_double(p.eps), fmt_double(p.x),
                         fmt_double(r.closed), fmt_double(r.oracle), fmt_double(r.relerr)}) +
               "\n";
    }
    return out;
}

}  // namespace detail

/// Executes one configured run; writes the CSV and a summary line to `os`.
/// Errors propagate as exceptions; see exit_code_for.
inline int run(const RunConfig& rc, std::ostream& os = std::cout) {
    const unsigned jobs = resolve_jobs(rc.jobs);
    QuadPlan plan = rc.quad;
    plan.jobs = jobs;
    std::ostringstream msg;
    msg.precision(6);
    switch (rc.subcommand) {
        case Subcommand::LEMMA_VERIFY: {
            const auto rows = verify_lemmas(rc.count, rc.seed, jobs);
            double worst = 0.0;
            for (const auto& r : rows) worst = std::max(worst, r.relerr);
            write_atomic(rc.outPath, detail::lemma_verify_csv(rows));
            msg << rows.size() << " rows, max relerr " << worst;
            break;
        }
        case Subcommand::P2_PROBE: {
            const auto rep = probe_p2(rc.probeModel, rc.spec.T, rc.gammas, rc.probeN);
            std::string out = "model,gamma,beta\n";
            for (std::size_t i = 0; i < rep.gammas.size(); ++i)
                out += join_csv({to_string(rc.probeModel.kind()), fmt_double(rep.gammas[i]), fmt_double(rep.betas[i])}) +
                       "\n";
            write_atomic(rc.outPath, out);
            msg << rep.gammas.size() << " gammas, beta(" << rep.gammas.front() << ") = " << rep.betas.front()
                << ", beta(" << rep.gammas.back() << ") = " << rep.betas.back();
            break;
        }
        case Subcommand::MOMENT: {
            const bool atZero = rc.method == MomentMethod::AT_ZERO ||
                                (rc.method == MomentMethod::AUTO && rc.spec.x_is_zero());
            const MomentResult r = atZero ? second_moment_at_zero(rc.spec, plan) : second_moment_general(rc.spec, plan);
            std::string out = "spec_hash,method,I1,I2,total,coarse,refinements,nodes1,nodes2\n";
            out += join_csv({spec_hash(rc), atZero ? "at_zero" : "general", fmt_double(r.I1), fmt_double(r.I2),
                             fmt_double(r.value), fmt_double(r.coarse), std::to_string(r.refinements),
                             std::to_string(r.nodes1), std::to_string(r.nodes2)}) +
                   "\n";
            write_atomic(rc.outPath, out);
            msg << "E|L|^2 = " << r.value << " after " << r.refinements << " refinement(s)";
            break;
        }
        case Subcommand::SIMULATE: {
            if (grid_bias_regime(rc.spec, rc.n) && rc.verbosity != Verbosity::QUIET)
                std::cerr << "warning: eps is below the grid's oscillation scale; the estimate is biased\n";
            MCOptions mo;
            mo.rule = rc.rule;
            mo.jobs = jobs;
            const MCEstimate e = mc_moments(rc.spec, rc.n, rc.M, rc.seed, mo);
            std::string out = "spec_hash,n,M,seed,mean,variance,second_moment,stderr_second_moment,stderr_mean\n";
            out += join_csv({spec_hash(rc), std::to_string(rc.n), std::to_string(e.replicates), std::to_string(e.seed),
                             fmt_double(e.mean), fmt_double(e.variance), fmt_double(e.secondMoment),
                             fmt_double(e.stderrSecondMoment), fmt_double(e.stderrMean)}) +
                   "\n";
            write_atomic(rc.outPath, out);
            msg << "E|L|^2 ~ " << e.secondMoment << " +- " << e.stderrSecondMoment << " (M = " << e.replicates << ")";
            break;
        }
        case Subcommand::SWEEP: {
            SweepOptions so;
            so.quad = plan;
            so.minQuadEps = rc.minQuadEps;
            so.jobs = jobs;
            if (rc.source == MomentSource::MC) so.mc = MCParams{rc.n, rc.M, rc.seed};
            const auto recs = sweep(rc.spec, rc.epsList, rc.source, so);
            write_atomic(rc.outPath, sweep_csv(recs));
            double lo = recs.front().ratio, hi = lo;
            for (const auto& r : recs) {
                lo = std::min(lo, r.ratio);
                hi = std::max(hi, r.ratio);
            }
            msg << recs.size() << " points, ratio in [" << lo << ", " << hi << "]";
            break;
        }
        case Subcommand::FIT: {
            const auto recs = parse_sweep_csv(read_file(rc.inputPath));
            const double slope = fit_slope(recs);
            write_atomic(rc.outPath, "records,slope\n" + std::to_string(recs.size()) + "," + fmt_double(slope) + "\n");
            msg << "slope " << slope << " over " << recs.size() << " records";
            break;
        }
        case Subcommand::XSHAPE: {
            const auto rep = x_shape_probe(rc.spec, rc.xMagnitudes, plan);
            std::string out = "x_norm,moment\n";
            for (const auto& r : rep.rows) out += join_csv({fmt_double(r.xNorm), fmt_double(r.moment)}) + "\n";
            write_atomic(rc.outPath, out);
            msg << "log c1 = " << rep.logC1 << ", c2 = " << rep.c2 << (rep.monotone ? "" : " (not monotone)");
            break;
        }
    }
    detail::summary(rc, os, msg.str() + " -> " + rc.outPath.string());
    return EXIT_OK;
}

/// Category exit code for an exception escaping parse_config or run.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return EXIT_CONFIG;
    if (dynamic_cast<const PreconditionError*>(&e)) return EXIT_PRECONDITION;
    if (dynamic_cast<const ConvergenceError*>(&e)) return EXIT_CONVERGENCE;
    return EXIT_OTHER;
}

inline const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal or unexpected error\n"
    "  2  configuration error (bad JSON, unknown key, invalid value)\n"
    "  3  precondition violated by the numerical routines\n"
    "  4  quadrature refinement did not converge\n";

}  // namespace gausslt
