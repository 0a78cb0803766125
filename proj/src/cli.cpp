#include "eja/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "eja/report.hpp"

namespace eja::cli {

namespace {

using report::json;

/// Usage problems detected after flag parsing.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               bool& done) {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    done = false;
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        done = true;
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }
    return kExitPass;
}

int usage(const CLI::App& app, std::ostream& err, const std::string& what) {
    err << "error: " << what << "\n\n" << app.help();
    return kExitUsage;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << text;
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

void print_summary(std::ostream& out, const std::vector<verify::SuiteReport>& reps) {
    out << std::left << std::setw(11) << "suite" << std::setw(22) << "algebra" << std::right << std::setw(7)
        << "trials" << std::setw(11) << "violations" << std::setw(9) << "skipped" << std::setw(9) << "uncert"
        << std::setw(10) << "control"
        << "  worst residual\n";
    for (const auto& r : reps) {
        const auto [key, value] = report::headline(r);
        std::string control = "-";
        if (r.control.trials) control = std::to_string(r.control.hits) + "/" + std::to_string(r.control.trials);
        out << std::left << std::setw(11) << r.name << std::setw(22) << r.algebra << std::right << std::setw(7)
            << r.trials << std::setw(11) << r.violations << std::setw(9) << r.skipped << std::setw(9)
            << r.uncertified << std::setw(10) << control << "  " << (key.empty() ? "-" : key + "=" + fmt(value))
            << (r.passed() ? "" : "  FAIL") << "\n";
    }
}

std::pair<double, double> parse_box(const std::string& s) {
    const auto pos = s.find("..");
    if (pos == std::string::npos) throw UsageError("--box expects l..u, got '" + s + "'");
    const auto num = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw UsageError("bad --box bound '" + t + "'");
        }
        if (used != t.size() || !std::isfinite(v)) throw UsageError("bad --box bound '" + t + "'");
        return v;
    };
    const double l = num(s.substr(0, pos));
    const double u = num(s.substr(pos + 2));
    if (l > u) throw UsageError("--box is empty: " + s);
    return {l, u};
}

/// `random` draws from rng; anything else is an element file.
Element element_arg(const std::string& arg, const AlgebraSpec& spec, Rng& rng, const char* what) {
    if (arg == "random") return random_element(spec, rng);
    Element x = [&] {
        try {
            return report::read_element_file(arg);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }();
    if (!(x.algebra() == spec))
        throw UsageError(std::string(what) + " lives in " + x.algebra().to_string() + ", expected " +
                         spec.to_string());
    return x;
}

void load_solver_config(const std::string& path, opt::SolverParams& p) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
        if (!j.is_object()) throw UsageError("config must be a JSON object");
        for (const auto& [k, v] : j.items()) {
            if (k == "max_iters") p.max_iters = v.get<int>();
            else if (k == "tol") p.tol = v.get<double>();
            else if (k == "seed") p.seed = v.get<std::uint64_t>();
            else if (k == "starts") p.starts = v.get<int>();
            else if (k == "newton") p.newton = v.get<bool>();
            else if (k == "spread") p.spread = v.get<double>();
            else if (k == "commute_tol") p.commute_tol = v.get<double>();
            else throw UsageError("unknown config key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError("malformed config '" + path + "': " + e.what());
    }
}

}  // namespace

int cmd_verify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Run randomized verification suites", "eja verify"};
    std::vector<std::string> suites{"all"};
    std::vector<std::string> algebras{"sym:3"};
    verify::SuiteConfig cfg;
    std::string out_path, format = "json";
    app.add_option("--suite", suites, "smooth, max, min, shifted, normalcone, appendix, kappa or all")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--algebra", algebras, "Algebra spec, repeatable (rn:4, sym:3, spin:5, prod(sym:3,spin:4))")
        ->capture_default_str();
    app.add_option("--trials", cfg.trials, "Trials per suite")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", cfg.seed, "Root seed")->capture_default_str();
    app.add_option("--tol-commute", cfg.tol.commute, "Commutation tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--tol-feas", cfg.tol.feas, "Feasibility tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--tol-value", cfg.tol.value, "Oracle value tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--starts", cfg.starts, "Multistart runs per solve")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--eps", cfg.eps, "Box half-width for the kappa suite")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads (0: EJA_THREADS or hardware)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_path, "Write the run record here");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    bool done = false;
    if (int rc = parse_args(app, args, out, err, done); done) return rc;
    for (const auto& s : suites)
        if (!verify::is_suite_name(s)) return usage(app, err, "unknown suite '" + s + "'");
    std::vector<AlgebraSpec> specs;
    try {
        for (const auto& a : algebras) specs.push_back(AlgebraSpec::parse(a));
    } catch (const std::invalid_argument& e) {
        return usage(app, err, e.what());
    }

    report::RunRecord rec;
    rec.timestamp = report::utc_timestamp();
    rec.version = report::version();
    rec.config.suites = suites;
    for (const auto& s : specs) rec.config.algebras.push_back(s.to_string());
    rec.config.trials = cfg.trials;
    rec.config.seed = cfg.seed;
    rec.config.tol = cfg.tol;
    rec.config.out = out_path;
    rec.config.format = format;
    try {
        for (const auto& spec : specs)
            for (const auto& s : suites) {
                cfg.algebra = spec;
                for (auto& r : verify::run_suite(s, cfg)) rec.reports.push_back(std::move(r));
            }
    } catch (const std::invalid_argument& e) {
        return usage(app, err, e.what());
    }
    rec.pass = std::all_of(rec.reports.begin(), rec.reports.end(), [](const auto& r) { return r.passed(); });

    print_summary(out, rec.reports);
    out << (rec.pass ? "PASS" : "FAIL") << "\n";
    if (!out_path.empty()) {
        try {
            if (format == "csv") {
                std::ostringstream os;
                report::write_csv(os, rec);
                write_text(out_path, os.str());
            } else {
                write_text(out_path, report::serialize(rec) + "\n");
            }
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitFail;
        }
    }
    return rec.pass ? kExitPass : kExitFail;
}

int cmd_solve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solve one optimization instance", "eja solve"};
    std::string algebra = "sym:3", objective, shift, orbit, box, sense_str = "min", config, out_path;
    opt::SolverParams params;
    params.starts = 8;
    bool oracle = false, no_newton = false;
    app.add_option("--algebra", algebra, "Algebra spec")->capture_default_str();
    app.add_option("--objective", objective, "schatten:p, powsum:p, sumsq, linear:<file|random> or kappa")
        ->required();
    app.add_option("--shift", shift, "Shift a: element file or random (kappa: random draws a positive a)");
    app.add_option("--orbit", orbit, "Orbit generator b: element file or random");
    app.add_option("--box", box, "Spectral box l..u applied to every eigenvalue");
    app.add_option("--sense", sense_str, "min or max")->check(CLI::IsMember({"min", "max"}))->capture_default_str();
    app.add_option("--config", config, "JSON solver parameters (flags override)");
    auto* seed_opt = app.add_option("--seed", params.seed, "Seed for random inputs and starts");
    auto* starts_opt = app.add_option("--starts", params.starts, "Multistart runs")->check(CLI::PositiveNumber);
    auto* iters_opt = app.add_option("--max-iters", params.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    auto* tol_opt = app.add_option("--tol", params.tol, "Stationarity tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--no-newton", no_newton, "Disable modified Newton steps");
    app.add_flag("--oracle", oracle, "Compare against the enumeration or clipping oracle");
    app.add_option("--out", out_path, "Write the result JSON here");

    bool done = false;
    if (int rc = parse_args(app, args, out, err, done); done) return rc;

    json result;
    bool ok = true;
    try {
        if (!config.empty()) {
            opt::SolverParams cfg_params = params;
            // Defaults from the file, then explicit flags on top.
            opt::SolverParams flags = params;
            load_solver_config(config, cfg_params);
            params = cfg_params;
            if (seed_opt->count()) params.seed = flags.seed;
            if (starts_opt->count()) params.starts = flags.starts;
            if (iters_opt->count()) params.max_iters = flags.max_iters;
            if (tol_opt->count()) params.tol = flags.tol;
        }
        if (no_newton) params.newton = false;
        if (params.starts < 1 || params.max_iters < 1 || !(params.tol > 0.0))
            throw UsageError("solver parameters must be positive");
        if (orbit.empty() == box.empty()) throw UsageError("give exactly one of --orbit or --box");

        AlgebraSpec spec = AlgebraSpec::real_vector(1);
        try {
            spec = AlgebraSpec::parse(algebra);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        const opt::Sense sense = opt::parse_sense(sense_str);
        Rng rng(params.seed);

        std::optional<Element> a, c;
        opt::Objective obj;
        if (objective == "kappa") {
            if (shift.empty() || shift == "random") {
                const auto frame = spectral_decompose(random_element(spec, rng)).frame;
                Eigen::VectorXd l(spec.rank());
                for (auto& v : l) v = uniform(rng, 1.0, 4.0);
                a = assemble(frame, l);
            } else {
                a = element_arg(shift, spec, rng, "--shift");
            }
            obj = opt::Objective::kappa(*a, sense);
        } else if (objective.rfind("linear:", 0) == 0) {
            c = element_arg(objective.substr(7), spec, rng, "--objective linear");
            obj = opt::Objective::linear(*c, sense);
        } else {
            specfun::SymmetricFunction f;
            try {
                f = specfun::parse_symmetric(objective);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            a = shift.empty() ? Element::zero(spec) : element_arg(shift, spec, rng, "--shift");
            obj = opt::Objective::shifted({f, spec}, *a, sense);
        }

        std::optional<opt::FeasibleSet> set;
        json set_json;
        if (!orbit.empty()) {
            const Element b = element_arg(orbit, spec, rng, "--orbit");
            set = opt::FeasibleSet::orbit(b);
            set_json = {{"kind", "orbit"}, {"b", report::element_to_json(b)}};
        } else {
            const auto [l, u] = parse_box(box);
            set = opt::FeasibleSet::spectral_box(spec, Eigen::VectorXd::Constant(spec.rank(), l),
                                                 Eigen::VectorXd::Constant(spec.rank(), u));
            set_json = {{"kind", "spectral_box"}, {"lower", l}, {"upper", u}};
        }

        opt::OptResult res;
        if (set->kind() == opt::FeasibleSet::Kind::Orbit) {
            res = opt::multistart(obj, *set, params);
        } else {
            opt::SolverParams one = params;
            one.starts = 1;
            res = opt::spectralbox_descent(obj, *set, Element::zero(spec), one);
            if (params.starts > 1) {
                opt::SolverParams rest = params;
                rest.seed = derive_seed(params.seed, 1);
                auto alt = opt::multistart(obj, *set, rest);
                const double band = 1e-12 * (1.0 + std::abs(res.value));
                const bool better = sense == opt::Sense::Min ? alt.value < res.value - band
                                                             : alt.value > res.value + band;
                if (better) res = std::move(alt);
            }
        }
        ok = res.converged;

        result = {{"schema", 1},
                  {"timestamp", report::utc_timestamp()},
                  {"version", report::version()},
                  {"command", "solve"},
                  {"algebra", spec.to_string()},
                  {"objective", obj.describe()},
                  {"sense", opt::to_string(sense)},
                  {"set", set_json},
                  {"params",
                   {{"max_iters", params.max_iters},
                    {"tol", params.tol},
                    {"seed", params.seed},
                    {"starts", params.starts},
                    {"newton", params.newton}}},
                  {"inputs", json::object()},
                  {"result", report::to_json(res)}};
        if (a) result["inputs"]["a"] = report::element_to_json(*a);
        if (c) result["inputs"]["c"] = report::element_to_json(*c);

        if (oracle) {
            json o;
            if (set->kind() == opt::FeasibleSet::Kind::Orbit &&
                (obj.kind == opt::Objective::Kind::Shifted || obj.kind == opt::Objective::Kind::Linear)) {
                const auto best = opt::permutation_oracle(obj, set->b());
                o = {{"kind", "permutation"}, {"value", report::encode_double(best.value)},
                     {"x", report::element_to_json(best.x)}};
                o["gap"] = std::abs(res.value - best.value);
                o["match"] = std::abs(res.value - best.value) <= 1e-6 * (1.0 + std::abs(best.value));
            } else if (set->kind() == opt::FeasibleSet::Kind::SpectralBox && obj.kind == opt::Objective::Kind::Kappa &&
                       sense == opt::Sense::Min && std::abs(set->lower()[0] + set->upper()[0]) == 0.0) {
                const double v = opt::kappa_clipping_oracle(eigenvalue_map(*a), set->upper()[0]);
                o = {{"kind", "kappa_clipping"}, {"value", v}, {"gap", std::abs(res.value - v)}};
                o["match"] = std::abs(res.value - v) <= 1e-4;
            } else {
                throw UsageError("--oracle needs an orbit with a shifted or linear objective, or kappa (min) over a "
                                 "symmetric box -e..e");
            }
            ok = ok && o["match"].get<bool>();
            result["oracle"] = o;
        }
    } catch (const UsageError& e) {
        return usage(app, err, e.what());
    } catch (const std::invalid_argument& e) {
        return usage(app, err, e.what());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }

    const std::string text = result.dump(2) + "\n";
    out << text;
    if (!out_path.empty()) {
        try {
            write_text(out_path, text);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitFail;
        }
    }
    if (!ok) err << (result["result"]["converged"].get<bool>() ? "oracle mismatch\n" : "solver did not converge\n");
    return ok ? kExitPass : kExitFail;
}

int cmd_demo(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Worked examples", "eja demo"};
    std::string which, algebra = "sym:3", out_path;
    verify::SuiteConfig cfg;
    cfg.trials = 1;
    double eps = 0.0;
    std::vector<double> eigs;
    app.add_option("example", which, "Example name (kappa)")->required()->check(CLI::IsMember({"kappa"}));
    app.add_option("--algebra", algebra, "Algebra spec")->capture_default_str();
    app.add_option("--eps", eps, "Box half-width, > 0")->required()->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Seed")->capture_default_str();
    app.add_option("--eigs", eigs, "Fixed eigenvalues of a, comma separated")->delimiter(',');
    app.add_option("--trials", cfg.trials, "Random instances")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--out", out_path, "Write the run record here");

    bool done = false;
    if (int rc = parse_args(app, args, out, err, done); done) return rc;

    report::RunRecord rec;
    try {
        cfg.algebra = AlgebraSpec::parse(algebra);
        if (!eigs.empty()) cfg.kappa_eigs = Eigen::Map<const Eigen::VectorXd>(eigs.data(), Eigen::Index(eigs.size()));
        cfg.eps = eps;
        rec.reports.push_back(verify::demo_kappa(cfg, eps));
    } catch (const std::invalid_argument& e) {
        return usage(app, err, e.what());
    }
    const auto& r = rec.reports[0];
    out << "kappa demo on " << r.algebra << ", eps = " << eps << "\n";
    out << std::left << std::setw(7) << "trial" << std::setw(16) << "kappa(a)" << std::setw(16) << "kappa(x+a)"
        << std::setw(16) << "oracle" << "commute(x,a)\n";
    for (const auto& t : r.records) {
        const auto get = [&](const char* k) {
            const auto it = t.residuals.find(k);
            return it == t.residuals.end() ? std::nan("") : it->second;
        };
        out << std::left << std::setw(7) << t.index << std::setw(16) << fmt(get("kappa_a"), 10) << std::setw(16)
            << fmt(get("kappa_x"), 10) << std::setw(16) << fmt(get("kappa_oracle"), 10)
            << fmt(get("commute_diagnostic")) << (t.passed ? "" : "  FAIL: " + t.note) << "\n";
    }
    out << (r.passed() ? "PASS" : "FAIL") << "\n";

    rec.timestamp = report::utc_timestamp();
    rec.version = report::version();
    rec.config.suites = {"kappa"};
    rec.config.algebras = {cfg.algebra.to_string()};
    rec.config.trials = cfg.trials;
    rec.config.seed = cfg.seed;
    rec.config.out = out_path;
    rec.pass = r.passed();
    if (!out_path.empty()) {
        try {
            write_text(out_path, report::serialize(rec) + "\n");
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitFail;
        }
    }
    return rec.pass ? kExitPass : kExitFail;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const std::string usage_text =
        "usage: eja <command> [options]\n\n"
        "commands:\n"
        "  verify   run verification suites and write a run record\n"
        "  solve    solve one instance over an orbit or a spectral box\n"
        "  demo     worked examples (demo kappa --eps E)\n\n"
        "run `eja <command> --help` for the options of a command\n";
    if (argc < 2) {
        err << usage_text;
        return kExitUsage;
    }
    const std::string cmd = argv[1];
    std::vector<std::string> rest(argv + 2, argv + argc);
    if (cmd == "verify") return cmd_verify(rest, out, err);
    if (cmd == "solve") return cmd_solve(rest, out, err);
    if (cmd == "demo") return cmd_demo(rest, out, err);
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
        out << usage_text;
        return kExitPass;
    }
    if (cmd == "--version") {
        out << "eja " << report::version() << "\n";
        return kExitPass;
    }
    err << "error: unknown command '" << cmd << "'\n\n" << usage_text;
    return kExitUsage;
}

}  // namespace eja::cli
