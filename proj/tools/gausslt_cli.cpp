#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausslt/cli.hpp"

namespace {

using gausslt::json;

struct Flags {
    std::string configPath;
    std::optional<std::string> out, seed, rule, source, method, input;
    std::optional<unsigned> jobs;
    std::optional<double> H1, H2, T, eps, minQuadEps;
    std::optional<long long> d, count, n, M, probeN;
    std::vector<int> k;
    std::vector<double> x, epsList, gammas, xs;
    bool quiet = false, verbose = false;
};

void add_common(CLI::App* app, Flags& f, bool positionalConfig = true) {
    if (positionalConfig) app->add_option("config", f.configPath, "JSON configuration file")->check(CLI::ExistingFile);
    else app->add_option("--config", f.configPath, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("-o,--out", f.out, "output CSV path (default: <subcommand>.csv)");
    app->add_option("--seed", f.seed, "64-bit seed, decimal or 0x-prefixed (default 0x5EED)");
    app->add_option("-j,--jobs", f.jobs, "worker threads (default: GAUSSLT_JOBS or 1)")->check(CLI::PositiveNumber);
    app->add_flag("-q,--quiet", f.quiet, "suppress the summary line");
    app->add_flag("-v,--verbose", f.verbose, "verbose output");
}

void add_field(CLI::App* app, Flags& f) {
    app->add_option("--H1", f.H1, "fBm Hurst index of the first process");
    app->add_option("--H2", f.H2, "fBm Hurst index of the second process");
    app->add_option("--T", f.T, "time horizon");
    app->add_option("--d", f.d, "dimension (k defaults to zeros)");
    app->add_option("--k", f.k, "multi-index, comma separated")->delimiter(',');
    app->add_option("--x", f.x, "spatial offset, comma separated")->delimiter(',');
}

json overrides(const Flags& f, gausslt::Subcommand sub) {
    json o = json::object();
    if (f.out) o["out"] = *f.out;
    if (f.seed) o["seed"] = *f.seed;
    if (f.jobs) o["jobs"] = *f.jobs;
    if (f.quiet) o["verbosity"] = "quiet";
    if (f.verbose) o["verbosity"] = "verbose";
    if (f.H1) {
        o["H1"] = *f.H1;
        o["model1"] = nullptr;
    }
    if (f.H2) {
        o["H2"] = *f.H2;
        o["model2"] = nullptr;
    }
    if (f.T) o["T"] = *f.T;
    if (f.d) o["d"] = *f.d;
    if (!f.k.empty()) o["k"] = f.k;
    if (!f.x.empty()) o["x"] = f.x;
    if (f.eps) o["eps"] = *f.eps;
    if (!f.epsList.empty()) {
        if (sub == gausslt::Subcommand::SWEEP) o["eps_list"] = f.epsList;
        else if (f.epsList.size() == 1) o["eps"] = f.epsList.front();
        else throw gausslt::ConfigError("--eps takes a single value for this subcommand");
    }
    if (f.minQuadEps) o["min_quad_eps"] = *f.minQuadEps;
    if (f.count) o["count"] = *f.count;
    if (f.n) o["n"] = *f.n;
    if (f.M) o["M"] = *f.M;
    if (f.probeN) o["probe_n"] = *f.probeN;
    if (f.rule) o["rule"] = *f.rule;
    if (f.source) o["source"] = *f.source;
    if (f.method) o["method"] = *f.method;
    if (f.input) o["input"] = *f.input;
    if (!f.gammas.empty()) o["gammas"] = f.gammas;
    if (!f.xs.empty()) o["x_magnitudes"] = f.xs;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gausslt: moments, simulation and rate experiments for derivatives of local times of "
                 "two-parameter Gaussian fields"};
    app.footer(gausslt::kExitCodeHelp);
    app.require_subcommand(1);
    Flags f;

    auto* lv = app.add_subcommand("lemma-verify", "compare the closed-form kernels with a 2D quadrature oracle");
    add_common(lv, f, false);
    lv->add_option("--count", f.count, "random draws per kernel (default 200)");

    auto* p2 = app.add_subcommand("p2-probe", "empirical increment-past decorrelation beta(gamma)");
    add_common(p2, f);
    p2->add_option("--T", f.T, "time horizon");
    p2->add_option("--gammas", f.gammas, "gamma values > 1, comma separated")->delimiter(',');
    p2->add_option("--probe-n", f.probeN, "log-spaced grid size (default 2048)");

    auto* mo = app.add_subcommand("moment", "second moment by deterministic quadrature");
    add_common(mo, f);
    add_field(mo, f);
    mo->add_option("--eps", f.epsList, "mollification eps");
    mo->add_option("--method", f.method, "general, at_zero or auto (default general)");

    auto* si = app.add_subcommand("simulate", "Monte Carlo estimate from exact path samples");
    add_common(si, f);
    add_field(si, f);
    si->add_option("--eps", f.epsList, "mollification eps");
    si->add_option("--n", f.n, "time grid size (default 256)");
    si->add_option("--M", f.M, "replicates (default 2000)");
    si->add_option("--rule", f.rule, "trapezoid or midpoint");

    auto* sw = app.add_subcommand("sweep", "moment/h(eps) over a decreasing eps list");
    add_common(sw, f);
    add_field(sw, f);
    sw->add_option("--eps", f.epsList, "strictly decreasing eps list, comma separated")->delimiter(',');
    sw->add_option("--source", f.source, "QUAD or MC (default QUAD)");
    sw->add_option("--n", f.n, "MC time grid size");
    sw->add_option("--M", f.M, "MC replicates");
    sw->add_option("--min-quad-eps", f.minQuadEps, "smallest eps accepted for QUAD (default 1e-4)");

    auto* fi = app.add_subcommand("fit", "log-log slope of a sweep CSV");
    add_common(fi, f, false);
    fi->add_option("input", f.input, "sweep CSV")->required()->check(CLI::ExistingFile);

    auto* xs = app.add_subcommand("xshape", "moments versus |x| with a Gaussian-shape fit");
    add_common(xs, f);
    add_field(xs, f);
    xs->add_option("--eps", f.epsList, "mollification eps");
    xs->add_option("--xs", f.xs, "|x| values, comma separated")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? gausslt::EXIT_OK : gausslt::EXIT_CONFIG;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const auto sub = gausslt::parse_subcommand(name);
        json file = f.configPath.empty() ? json::object() : gausslt::load_config_file(f.configPath);
        const json merged = gausslt::merge_config(std::move(file), overrides(f, sub));
        const gausslt::RunConfig rc = gausslt::parse_config(sub, merged);
        return gausslt::run(rc, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gausslt::exit_code_for(e);
    }
}
