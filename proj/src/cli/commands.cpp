#include "bandedge/cli.hpp"

#include "bandedge/cheby.hpp"
#include "bandedge/circulant.hpp"
#include "bandedge/edge_stats.hpp"
#include "bandedge/errors.hpp"
#include "bandedge/path_oracle.hpp"
#include "bandedge/sampler.hpp"

#include <CLI11.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef BANDEDGE_VERSION
#define BANDEDGE_VERSION "unknown"
#endif

namespace bandedge::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct OptionSpec {
    const char* key;
    const char* help;
    bool is_flag = false;
};

const std::vector<OptionSpec> kCommon = {
    {"n-sites", "number of sites N"},
    {"w", "half bandwidth W"},
    {"beta", "symmetry class: 1 (signs) or 2 (phases)"},
    {"seed", "master seed (64-bit)"},
    {"out", "output directory (default .)"},
    {"threads", "worker threads (fallback: BANDEDGE_THREADS, then 1)"},
};

const std::map<std::string, std::vector<OptionSpec>> kCommandOptions = {
    {"walk",
     {{"lengths", "walk lengths n, comma separated"},
      {"r", "distances R, comma separated (default: all)"},
      {"precise", "Fourier sums with 50 significant digits", true},
      {"upper-const", "constant C of the upper bound (default 1)"},
      {"upper-rate", "constant c of the upper bound (default 1)"},
      {"walk-budget", "cap on N*degree*n for the exact integer DP"}}},
    {"moments",
     {{"n-max", "largest n (default 8)"},
      {"method", "exact, hutchinson or exhaustive (default exact)"},
      {"replicates", "number of matrices (default 1)"},
      {"probes", "Hutchinson probes per trace (default 32)"},
      {"dense-budget", "largest N for dense operators (default 4096)"}}},
    {"oracle",
     {{"lengths", "path lengths n(1..k), comma separated"},
      {"check-exhaustive", "compare with the ensemble average", true},
      {"samples", "Monte Carlo samples for the phase check (default 100000)"},
      {"max-total-length", "enumeration budget on the total length (default 10)"}}},
    {"edge",
     {{"replicates", "number of matrices (default 1)"},
      {"regime", "rmt or poisson (default rmt)"},
      {"lambda-start", "first grid point (default 0.25)"},
      {"lambda-stop", "last grid point (default 6)"},
      {"lambda-count", "grid size (default 24)"},
      {"eigen-budget", "largest N for the eigensolver (default 4096)"}}},
    {"norm",
     {{"replicates", "number of matrices (default 1)"},
      {"ipr", "also record the IPR of the top eigenvector", true},
      {"eigen-budget", "largest N for the eigensolver (default 4096)"}}},
    {"validate",
     {{"matrix", "matrix CSV (u,v,re,im) to validate"},
      {"dump", "sample a matrix from --seed and write it to this CSV"},
      {"replicate", "replicate index of the dumped matrix (default 0)"}}},
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

class Context {
public:
    Context(std::string command, Settings settings, int threads)
        : command_(std::move(command)), settings_(std::move(settings)), threads_(threads),
          out_dir_(settings_.get_string("out", ".")) {}

    const Settings& settings() const { return settings_; }
    int threads() const { return threads_; }
    const fs::path& out_dir() const { return out_dir_; }
    std::uint64_t seed() const { return settings_.get_u64("seed", 0); }

    BandParams params() const {
        BandParams p{settings_.get_int("n-sites"), settings_.get_int("w"),
                     SymmetryClass::signs};
        p.symmetry = symmetry_from_beta(static_cast<int>(settings_.get_int("beta", 1)));
        p.check();
        return p;
    }

    void write_manifest(const json& extra = json::object()) const {
        json config = json::object();
        for (const auto& [key, s] : settings_.entries()) config[key] = s.value;
        json manifest = {
            {"command", command_},
            {"config", config},
            {"master_seed", seed()},
            {"rng", kRngIdentifier},
            {"code_version", BANDEDGE_VERSION},
            {"threads", threads_},
        };
        for (const auto& [k, v] : extra.items()) manifest[k] = v;
        write("manifest.json", manifest.dump(2) + "\n");
    }

    void write(const std::string& name, const std::string& body) const {
        const fs::path path = out_dir_ / name;
        std::ofstream file(path, std::ios::binary);
        if (!file) throw ConfigError(fmt::format("cannot write {}", path.string()));
        file << body;
        if (!file) throw ConfigError(fmt::format("failed writing {}", path.string()));
    }

private:
    std::string command_;
    Settings settings_;
    int threads_;
    fs::path out_dir_;
};

json params_json(const BandParams& p) {
    return {{"n_sites", p.n_sites}, {"half_bandwidth", p.half_bandwidth}, {"beta", beta_of(p.symmetry)}};
}

int positive(const Settings& s, const std::string& key, std::int64_t fallback) {
    const auto v = s.get_int(key, fallback);
    if (v < 1) throw ConfigError(fmt::format("setting '{}' must be positive, got {}", key, v));
    return static_cast<int>(v);
}

int run_walk(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    const Vertex N = s.get_int("n-sites");
    const Vertex W = s.get_int("w");
    const CirculantGraph graph(N, W);
    const auto lengths = s.get_int_list("lengths");
    std::vector<Vertex> distances;
    if (s.has("r")) {
        for (int r : s.get_int_list("r")) distances.push_back(r);
    } else {
        for (Vertex r = 0; r < N; ++r) distances.push_back(r);
    }
    const bool precise = s.get_bool("precise", false);
    const UpperBoundConstants constants{s.get_double("upper-const", 1.0), s.get_double("upper-rate", 1.0)};
    const auto budget = static_cast<std::size_t>(s.get_u64("walk-budget", kDefaultWalkBudget));

    json methods = json::object();
    std::string csv = "n,R,count_exact,count_fourier,gaussian,uniform,upper_bound\n";
    ctx.write_manifest({{"walk_normalization", "counts divided by degree^n"}});
    for (int n : lengths) {
        std::vector<double> exact;
        try {
            using Precise = boost::multiprecision::cpp_bin_float_50;
            const auto counts = walk_count_dp(graph, n, budget);
            BigCount total = 0;
            for (const auto& c : counts) total += c;
            for (const auto& c : counts) exact.push_back((Precise(c) / Precise(total)).convert_to<double>());
            methods[std::to_string(n)] = "integer_dp";
        } catch (const ResourceError&) {
            exact = walk_distribution_dp(graph, n);
            methods[std::to_string(n)] = "float_dp";
        }
        const auto fourier =
            precise ? walk_distribution_fourier_precise(graph, n) : walk_distribution_fourier(graph, n);
        for (Vertex R : distances) {
            const Vertex r = wrap(R, N);
            const auto a = walk_asymptotics(graph, n, r, constants);
            csv += fmt::format("{},{},{},{},{},{},{}\n", n, R, num(exact[r]), num(fourier[r]),
                               num(a.gaussian), num(a.uniform), num(a.upper_bound));
        }
    }
    ctx.write("walk.csv", csv);
    ctx.write("walk_methods.json", methods.dump(2) + "\n");
    out << fmt::format("wrote {}\n", (ctx.out_dir() / "walk.csv").string());
    return kExitOk;
}

int run_moments(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    const auto params = ctx.params();
    const int n_max = positive(s, "n-max", 8);
    const std::string method = s.get_string("method", "exact");
    const int replicates = positive(s, "replicates", 1);
    const int probes = positive(s, "probes", 32);
    const Vertex dense_budget = s.get_int("dense-budget", kDefaultDenseBudget);
    if (method != "exact" && method != "hutchinson" && method != "exhaustive") {
        throw ConfigError(fmt::format("setting 'method' expects exact, hutchinson or exhaustive, got '{}'", method));
    }
    ctx.write_manifest({{"params", params_json(params)}});

    const auto N0 = static_cast<std::size_t>(n_max) + 1;
    std::vector<std::vector<double>> rows(N0);  // per n: one value per replicate
    std::vector<double> single_error(N0, 0.0);
    std::uint64_t used = 0;
    if (method == "exhaustive") {
        const SignAssignments all(params);
        std::vector<long double> sum(N0, 0.0L);
        for (std::uint64_t i = 0; i < all.size(); ++i) {
            const auto traces = nb_moment_traces(all.at(i), n_max, dense_budget);
            for (std::size_t n = 0; n < N0; ++n) sum[n] += traces[n];
        }
        for (std::size_t n = 0; n < N0; ++n) {
            rows[n].push_back(static_cast<double>(sum[n] / static_cast<long double>(all.size())));
        }
        used = all.size();
    } else {
        for (int r = 0; r < replicates; ++r) {
            const SeedSpec seed{ctx.seed(), static_cast<std::uint64_t>(r)};
            const auto H = sample_band_matrix(params, seed);
            if (method == "exact") {
                const auto traces = nb_moment_traces(H, n_max, dense_budget);
                for (std::size_t n = 0; n < N0; ++n) rows[n].push_back(traces[n]);
            } else {
                for (std::size_t n = 0; n < N0; ++n) {
                    const auto est = hutchinson_trace(H, static_cast<int>(n), probes, seed);
                    rows[n].push_back(est.estimate);
                    single_error[n] = est.std_error;
                }
            }
        }
        used = static_cast<std::uint64_t>(replicates);
    }

    std::string csv = "n,trace_mean,trace_std_error,method,replicates\n";
    for (std::size_t n = 0; n < N0; ++n) {
        const auto& v = rows[n];
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double se = 0.0;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - m) * (x - m);
            se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        } else if (method == "hutchinson") {
            se = single_error[n];
        }
        csv += fmt::format("{},{},{},{},{}\n", n, num(m), num(se), method, used);
    }
    ctx.write("moments.csv", csv);
    out << fmt::format("wrote {}\n", (ctx.out_dir() / "moments.csv").string());
    return kExitOk;
}

int run_oracle(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    const auto params = ctx.params();
    const auto spec = make_spec(s.get_int_list("lengths"), params.symmetry);
    OracleBudget budget;
    budget.max_total_length = positive(s, "max-total-length", budget.max_total_length);
    ctx.write_manifest({{"params", params_json(params)}});

    const auto moment = joint_moment_paths(params, spec, budget);
    const auto cumulant = cumulant_T(params, spec, budget);
    json census = json::array();
    for (const auto& [genus, count] : diagram_census(params, spec, budget)) {
        census.push_back({{"s", genus}, {"count", count}});
    }
    json result = {
        {"params", params_json(params)},
        {"lengths", spec.lengths},
        {"joint_moment", moment},
        {"cumulant", cumulant},
        {"diagram_census", census},
    };
    bool agrees = true;
    if (s.get_bool("check-exhaustive", false)) {
        if (params.symmetry == SymmetryClass::signs) {
            const auto exhaustive = exhaustive_joint_moment(params, spec.lengths);
            agrees = exhaustive == moment;
            result["exhaustive_check"] = {{"method", "all sign matrices"},
                                          {"joint_moment", exhaustive},
                                          {"agrees", agrees}};
        } else {
            const auto samples = s.get_int("samples", 100000);
            const auto mc = monte_carlo_joint_moment(params, spec.lengths, samples, ctx.seed());
            agrees = std::abs(mc.mean - static_cast<double>(moment)) <= 4.0 * mc.std_error + 1e-9;
            result["exhaustive_check"] = {{"method", "monte carlo over phase matrices"},
                                          {"mean", mc.mean},
                                          {"std_error", mc.std_error},
                                          {"samples", mc.samples},
                                          {"agrees", agrees}};
        }
    }
    ctx.write("oracle.json", result.dump(2) + "\n");
    out << result.dump(2) << "\n";
    if (!agrees) throw NumericError("path oracle and ensemble average disagree");
    return kExitOk;
}

int run_edge(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    EnsembleConfig config;
    config.params = ctx.params();
    config.replicates = positive(s, "replicates", 1);
    config.master_seed = ctx.seed();
    config.regime = regime_from_string(s.get_string("regime", "rmt"));
    config.lambda_grid = lambda_grid(s.get_double("lambda-start", 0.25), s.get_double("lambda-stop", 6.0),
                                     positive(s, "lambda-count", 24));
    config.threads = ctx.threads();
    config.eigen_budget = s.get_int("eigen-budget", kDefaultEigenBudget);
    ctx.write_manifest({{"params", params_json(config.params)}, {"regime", to_string(config.regime)}});

    const auto summary = ensemble_run(config);
    std::string extremes = "replicate,alpha_max,alpha_min,scaled_right,scaled_left,norm_ratio\n";
    for (int r = 0; r < summary.replicate_count; ++r) {
        extremes += fmt::format("{},{},{},{},{},{}\n", r, num(summary.alpha_max[r]), num(summary.alpha_min[r]),
                                num(summary.scaled_max_samples[r]), num(summary.scaled_min_samples[r]),
                                num(summary.norm_ratios[r]));
    }
    std::string curves = "lambda,sigma_R_mean,sigma_L_mean,sigma_R_std\n";
    for (std::size_t g = 0; g < config.lambda_grid.size(); ++g) {
        curves += fmt::format("{},{},{},{}\n", num(config.lambda_grid[g]), num(summary.mean_curve_R.values[g]),
                              num(summary.mean_curve_L.values[g]), num(summary.sigma_R_std[g]));
    }
    ctx.write("extremes.csv", extremes);
    ctx.write("curves.csv", curves);

    json diag = {{"replicates", summary.replicate_count},
                 {"ks_right_vs_left", ks_distance(summary.scaled_max_samples, summary.scaled_min_samples)}};
    try {
        const auto fit = tail_fit(summary.mean_curve_R, 1.0, 6.0);
        diag["tail_fit"] = {{"exponent", fit.exponent}, {"coefficient", fit.coefficient}, {"points", fit.points}};
    } catch (const DomainError& e) {
        diag["tail_fit"] = {{"unavailable", e.what()}};
    }
    if (config.regime == Regime::poisson) diag["survival_deviation"] = survival_consistency(summary);
    ctx.write("summary.json", diag.dump(2) + "\n");
    out << fmt::format("wrote extremes.csv and curves.csv to {}\n", ctx.out_dir().string());
    return kExitOk;
}

int run_norm(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    EnsembleConfig config;
    config.params = ctx.params();
    config.replicates = positive(s, "replicates", 1);
    config.master_seed = ctx.seed();
    config.threads = ctx.threads();
    config.eigen_budget = s.get_int("eigen-budget", kDefaultEigenBudget);
    const bool with_ipr = s.get_bool("ipr", false);
    ctx.write_manifest({{"params", params_json(config.params)}});

    const auto summary = ensemble_run(config);
    std::string csv = with_ipr ? "replicate,alpha_max,alpha_min,norm_ratio,ipr_right\n"
                               : "replicate,alpha_max,alpha_min,norm_ratio\n";
    for (int r = 0; r < summary.replicate_count; ++r) {
        csv += fmt::format("{},{},{},{}", r, num(summary.alpha_max[r]), num(summary.alpha_min[r]),
                           num(summary.norm_ratios[r]));
        if (with_ipr) {
            const auto H = sample_band_matrix(config.params, {config.master_seed, static_cast<std::uint64_t>(r)});
            csv += "," + num(ipr(edge_eigenpair(H, Side::right, config.eigen_budget).vector));
        }
        csv += "\n";
    }
    ctx.write("norms.csv", csv);
    const json diag = {{"replicates", summary.replicate_count}, {"median_norm", median(summary.norm_ratios)}};
    ctx.write("summary.json", diag.dump(2) + "\n");
    out << diag.dump(2) << "\n";
    return kExitOk;
}

int run_validate(const Context& ctx, std::ostream& out) {
    const auto& s = ctx.settings();
    const auto params = ctx.params();
    ctx.write_manifest({{"params", params_json(params)}});
    std::optional<BandMatrix> H;
    if (s.has("dump")) {
        H = sample_band_matrix(params, {ctx.seed(), s.get_u64("replicate", 0)});
        std::ofstream file(s.get_string("dump", ""));
        if (!file) throw ConfigError(fmt::format("cannot write {}", s.get_string("dump", "")));
        write_matrix_csv(file, *H);
    }
    if (s.has("matrix")) {
        const std::string path = s.get_string("matrix", "");
        std::ifstream file(path);
        if (!file) throw ConfigError(fmt::format("cannot read matrix file {}", path));
        try {
            H = read_matrix_csv(file, params);
        } catch (const DomainError& e) {
            throw ConfigError(fmt::format("{}: {}", path, e.what()));
        }
    }
    if (!H) throw ConfigError("validate needs --matrix or --dump");

    const auto violations = validate(*H);
    json list = json::array();
    for (const auto& v : violations) {
        list.push_back({{"kind", to_string(v.kind)}, {"u", v.u}, {"v", v.v}, {"message", v.message}});
    }
    const json report = {{"valid", violations.empty()}, {"violations", list}};
    ctx.write("validation.json", report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return violations.empty() ? kExitOk : kExitFailure;
}

struct Failure {
    int code;
    const char* kind;
};

Failure classify(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError&) {
        return {kExitConfig, "config"};
    } catch (const DomainError&) {
        return {kExitConfig, "domain"};
    } catch (const ResourceError&) {
        return {kExitResource, "resource"};
    } catch (const NumericError&) {
        return {kExitNumeric, "numeric"};
    } catch (const StructuralError&) {
        return {kExitFailure, "structural"};
    } catch (...) {
        return {kExitFailure, "internal"};
    }
}

std::string message_of(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic band matrices: walks, non-backtracking moments, path oracle, edge statistics"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, CLI::Option*>> options;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config_path;
    std::map<std::string, CLI::App*> subcommands;
    const std::map<std::string, std::string> descriptions = {
        {"walk", "walk counts on the circulant graph, exact and Fourier, with asymptotics"},
        {"moments", "traces of the non-backtracking operators H^(n)"},
        {"oracle", "exhaustive k-path enumeration: joint moment, cumulant, genus census"},
        {"edge", "extreme eigenvalue ensemble: extremes.csv and curves.csv"},
        {"norm", "operator norm of H / (2 sqrt(2W)) over replicates"},
        {"validate", "check or dump a band matrix CSV"},
    };
    for (const auto& [name, specific] : kCommandOptions) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        subcommands[name] = sub;
        sub->add_option("--config", config_path, "flat key=value configuration file");
        std::vector<OptionSpec> all = kCommon;
        all.insert(all.end(), specific.begin(), specific.end());
        for (const auto& spec : all) {
            const std::string id = name + "/" + spec.key;
            if (spec.is_flag) {
                options[name][spec.key] = sub->add_flag(std::string("--") + spec.key, flags[id], spec.help);
            } else {
                options[name][spec.key] = sub->add_option(std::string("--") + spec.key, values[id], spec.help);
            }
        }
    }

    fs::path out_dir;
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            throw ConfigError(e.what());
        }

        std::string command;
        for (const auto& [name, sub] : subcommands) {
            if (sub->parsed()) command = name;
        }

        Settings settings;
        if (!config_path.empty()) {
            std::ifstream file(config_path);
            if (!file) throw ConfigError(fmt::format("cannot read config file {}", config_path));
            settings = Settings::parse(file, config_path);
        }
        for (const auto& [key, option] : options[command]) {
            if (option->count() == 0) continue;
            const std::string id = command + "/" + key;
            settings.set(key, flags.count(id) ? std::string("true") : values[id], "--" + key);
        }

        out_dir = settings.get_string("out", ".");
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", out_dir.string(), ec.message()));
        for (const auto& [key, setting] : settings.entries()) {
            if (options[command].count(key) == 0) {
                throw ConfigError(fmt::format("{}: unknown key '{}' for command {}", setting.origin, key, command));
            }
        }

        const int threads = resolve_threads(
            settings.has("threads") ? std::optional<std::string>(settings.get_string("threads", "")) : std::nullopt,
            std::getenv("BANDEDGE_THREADS"));
        const Context ctx(command, settings, threads);
        if (command == "walk") return run_walk(ctx, out);
        if (command == "moments") return run_moments(ctx, out);
        if (command == "oracle") return run_oracle(ctx, out);
        if (command == "edge") return run_edge(ctx, out);
        if (command == "norm") return run_norm(ctx, out);
        return run_validate(ctx, out);
    } catch (...) {
        const auto error = std::current_exception();
        const auto failure = classify(error);
        const json report = {{"error", {{"kind", failure.kind}, {"message", message_of(error)}, {"exit_code", failure.code}}}};
        err << report.dump() << "\n";
        if (!out_dir.empty() && fs::is_directory(out_dir)) {
            std::ofstream file(out_dir / "error.json");
            file << report.dump(2) << "\n";
        }
        return failure.code;
    }
}

} // namespace bandedge::cli
