#include "eja/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace eja::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kControlStep = 0.1;

using opt::FeasibleSet;
using opt::Objective;
using opt::Sense;
using opt::SolverParams;
using specfun::SpectralFunction;

bool is_margin(const std::string& key) {
    return key == "control" || (key.size() >= 7 && key.compare(key.size() - 7, 7, "_margin") == 0);
}

int worker_count(int requested, int trials) {
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("EJA_THREADS")) {
            const int cap = std::atoi(env);
            if (cap > 0) n = cap;
        }
    }
    return std::clamp(n, 1, std::max(1, trials));
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

/// Collects random inputs and residuals of one trial.
class Trial {
public:
    Trial(int index, std::uint64_t seed) {
        rec_.index = index;
        rec_.seed = seed;
    }

    void input(const std::string& key, const Eigen::VectorXd& v) {
        rec_.inputs[key] = std::vector<double>(v.data(), v.data() + v.size());
        order_.push_back(v);
    }
    void input(const std::string& key, const Element& x) { input(key, x.coords()); }

    void residual(const std::string& key, double v) { rec_.residuals[key] = v; }
    /// Residual that must not exceed limit; records a failure otherwise.
    void check(const std::string& key, double v, double limit) {
        residual(key, v);
        if (!(v <= limit)) fail(key + " above " + fmt(limit));
    }
    /// Margin that must be strictly positive.
    void check_margin(const std::string& key, double v) {
        residual(key, v);
        if (!(v > 0.0)) fail(key + " not positive");
    }
    void fail(const std::string& why) {
        rec_.passed = false;
        if (rec_.note.empty()) rec_.note = why;
    }
    void skip(const std::string& why) {
        rec_.skipped = true;
        rec_.note = why;
    }
    void uncertified(const std::string& why) {
        rec_.uncertified = true;
        if (rec_.note.empty()) rec_.note = why;
    }

    TrialRecord finish() {
        std::vector<const Eigen::VectorXd*> parts;
        for (const auto& v : order_) parts.push_back(&v);
        rec_.inputs_hash = hash_inputs(parts);
        if (rec_.passed && !rec_.skipped) rec_.inputs.clear();
        return std::move(rec_);
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

private:
    TrialRecord rec_;
    std::vector<Eigen::VectorXd> order_;
};

struct SuiteDef {
    std::string name;
    std::map<std::string, double> limits;
    double control_threshold = 0.0;
    std::vector<std::string> notes;
    std::function<TrialRecord(int, std::uint64_t)> trial;
};

SuiteReport run(const SuiteDef& def, const SuiteConfig& cfg) {
    SuiteReport rep;
    rep.name = def.name;
    rep.algebra = cfg.algebra.to_string();
    rep.trials = cfg.trials;
    rep.limits = def.limits;
    rep.notes = def.notes;
    rep.control.threshold = def.control_threshold;
    rep.records.resize(static_cast<std::size_t>(cfg.trials));

    parallel_for(cfg.trials, worker_count(cfg.threads, cfg.trials), [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        TrialRecord r;
        try {
            r = def.trial(i, seed);
        } catch (const std::exception& e) {
            r.index = i;
            r.seed = seed;
            r.passed = false;
            r.note = std::string("exception: ") + e.what();
        }
        rep.records[static_cast<std::size_t>(i)] = std::move(r);
    });

    for (const auto& r : rep.records) {
        if (r.skipped) {
            ++rep.skipped;
            continue;
        }
        if (!r.passed) ++rep.violations;
        if (r.uncertified) ++rep.uncertified;
        for (const auto& [key, v] : r.residuals) {
            if (key == "control") {
                ++rep.control.trials;
                if (v > def.control_threshold) ++rep.control.hits;
            }
            auto it = rep.worst.find(key);
            if (it == rep.worst.end())
                rep.worst.emplace(key, v);
            else
                it->second = is_margin(key) ? std::min(it->second, v) : std::max(it->second, v);
        }
    }
    return rep;
}

LinearMap unit_derivation(const lie::DerivationBasis& basis, Rng& rng) {
    LinearMap d = lie::random_derivation(basis, rng, 1.0);
    const double n = frobenius_norm(d);
    return n > 0.0 ? (1.0 / n) * d : d;
}

/// exp(0.1 D̂) x with D̂ a unit derivation that moves x. Empty when Der(V)
/// has no direction moving x.
std::optional<Element> control_point(const Element& x, const lie::DerivationBasis& basis, Rng& rng) {
    if (basis.dimension() == 0) return std::nullopt;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const LinearMap d = unit_derivation(basis, rng);
        if (norm(d(x)) > 1e-6 * (1.0 + norm(x))) return lie::exp_derivation(d, kControlStep)(x);
    }
    return std::nullopt;
}

Element random_orbit_generator(const AlgebraSpec& spec, Rng& rng) {
    return random_element(spec, rng);
}

LinearMap random_self_adjoint(const AlgebraSpec& spec, Rng& rng) {
    const int n = spec.dim();
    Eigen::MatrixXd g(n, n);
    for (int j = 0; j < n; ++j) g.col(j) = random_normal(n, rng, 1.0 / std::sqrt(double(n)));
    return LinearMap(spec, 0.5 * (g + g.transpose()));
}

SolverParams solver_params(const SuiteConfig& cfg, std::uint64_t seed) {
    SolverParams p;
    p.seed = seed;
    p.starts = cfg.starts;
    p.commute_tol = cfg.tol.commute;
    return p;
}

double commute_residual(const Element& a, const Element& b) {
    return operator_commutes(a, b, 0.0).residual;
}

// ---------------------------------------------------------------- smooth

SuiteDef smooth_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "smooth";
    def.limits = {{"commute_min", cfg.tol.commute}, {"commute_max", cfg.tol.commute},
                  {"feasibility", cfg.tol.feas}};
    def.control_threshold = 1e-3;
    def.notes = {"quadratic theta over the orbit of a random b, F = schatten:2, multistart min and max",
                 "solutions with stationarity above the certification threshold are counted as uncertified"};
    def.trial = [cfg, basis](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const AlgebraSpec& spec = cfg.algebra;
        const Element b = random_orbit_generator(spec, rng);
        const LinearMap m = random_self_adjoint(spec, rng);
        const Element c = random_element(spec, rng);
        t.input("b", b);
        t.input("m", Eigen::Map<const Eigen::VectorXd>(m.matrix().data(), m.matrix().size()));
        t.input("c", c);
        const FeasibleSet set = FeasibleSet::orbit(b);
        const SpectralFunction F{specfun::schatten(2), spec};
        double feas = 0.0;
        std::optional<Element> control_from;
        for (Sense sense : {Sense::Min, Sense::Max}) {
            const Objective obj = Objective::quadratic(m, c, sense, F);
            const auto res = opt::multistart(obj, set, solver_params(cfg, derive_seed(seed, 100 + int(sense))),
                                             basis.get());
            const std::string tag = opt::to_string(sense);
            feas = std::max(feas, set.defect(res.x));
            t.residual("stationarity_" + tag, res.stationarity);
            const double r = commute_residual(res.x, m(res.x) + c);
            if (res.stationarity <= cfg.stationarity)
                t.check("commute_" + tag, r, cfg.tol.commute);
            else {
                t.residual("commute_" + tag, r);
                t.uncertified(tag + " solution not stationary");
            }
            if (!control_from) control_from = res.x;
        }
        t.check("feasibility", feas, cfg.tol.feas);
        if (auto xp = control_point(*control_from, *basis, rng))
            t.residual("control", commute_residual(*xp, m(*xp) + c));
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- max

SuiteDef max_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "max";
    def.limits = {{"commute", cfg.tol.commute}, {"feasibility", cfg.tol.feas}};
    def.control_threshold = 1e-3;
    def.notes = {"theta alternates between <c,x> and schatten:2(x - c); F alternates between 0 and schatten:3",
                 "subgradients are sampled: the gradient and the block-averaged spectral subgradient at x - c; "
                 "the full subdifferential is not enumerable"};
    def.trial = [cfg, basis](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const AlgebraSpec& spec = cfg.algebra;
        const Element b = random_orbit_generator(spec, rng);
        const Element c = random_element(spec, rng);
        t.input("b", b);
        t.input("c", c);
        const FeasibleSet set = FeasibleSet::orbit(b);
        std::optional<SpectralFunction> F;
        if (index % 2 == 1) F = SpectralFunction{specfun::schatten(3), spec};
        const bool linear = (index / 2) % 2 == 0;
        const SpectralFunction s2{specfun::schatten(2), spec};
        const Objective obj = linear ? Objective::linear(c, Sense::Max, F) : Objective::shifted(s2, c, Sense::Max, F);
        const auto res = opt::multistart(obj, set, solver_params(cfg, derive_seed(seed, 1)), basis.get());
        t.check("feasibility", set.defect(res.x), cfg.tol.feas);
        t.residual("stationarity", res.stationarity);

        std::vector<Element> subgrads;
        if (linear) {
            subgrads.push_back(c);
        } else {
            subgrads.push_back(obj.theta_gradient(res.x));
            subgrads.push_back(specfun::spectral_subgradient(s2, res.x - c));
        }
        double worst = 0.0;
        for (const auto& v : subgrads) worst = std::max(worst, commute_residual(res.x, v));
        t.residual("subgradients", double(subgrads.size()));
        if (res.stationarity <= cfg.stationarity)
            t.check("commute", worst, cfg.tol.commute);
        else {
            t.residual("commute", worst);
            t.uncertified("maximizer not stationary");
        }
        if (auto xp = control_point(res.x, *basis, rng)) t.residual("control", commute_residual(*xp, c));
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- min

double affine_scale(const Objective& hard, const Element& b) {
    double cmax = 0.0;
    for (const auto& g : hard.generators) cmax = std::max(cmax, norm(g));
    const double dmax = hard.offsets.size() ? hard.offsets.cwiseAbs().maxCoeff() : 0.0;
    return 1.0 + cmax * norm(b) + dmax;
}

SuiteDef min_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "min";
    def.limits = {{"commute", cfg.tol.commute}, {"feasibility", cfg.tol.feas}};
    def.notes = {"theta = max_j <c_j,x> + d_j with 3 to 5 generators, F = schatten:2, orbit of a random b",
                 "minimized by log-sum-exp continuation down to mu = 1e-9 scale, then simplex search over the active set"};
    def.trial = [cfg, basis](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const AlgebraSpec& spec = cfg.algebra;
        const Element b = random_orbit_generator(spec, rng);
        const int m = 3 + index % 3;
        std::vector<Element> gens;
        for (int j = 0; j < m; ++j) gens.push_back(random_element(spec, rng));
        const Eigen::VectorXd d = random_normal(m, rng, 0.5);
        t.input("b", b);
        for (int j = 0; j < m; ++j) t.input("c" + std::to_string(j), gens[std::size_t(j)]);
        t.input("d", d);
        const FeasibleSet set = FeasibleSet::orbit(b);
        const Objective hard =
            Objective::max_affine(gens, d, Sense::Min, 0.0, SpectralFunction{specfun::schatten(2), spec});
        const auto cert = certify_min_principle(hard, set, cfg, *basis, derive_seed(seed, 1));
        t.check("feasibility", set.defect(cert.x), cfg.tol.feas);
        t.residual("stationarity", cert.stationarity);
        t.residual("active", double(cert.active.size()));
        t.residual("initial_commute", cert.initial_residual);
        t.check("commute", cert.residual, cfg.tol.commute);
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- shifted

bool has_factor_ties(const Element& a) {
    for (const auto& part : split(a)) {
        if (part.algebra().rank() < 2) continue;
        const Eigen::VectorXd l = eigenvalue_map(part);
        const double tol = default_tie_tolerance(l.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i + 1 < l.size(); ++i)
            if (l[i] - l[i + 1] <= tol) return true;
    }
    return false;
}

SuiteDef shifted_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "shifted";
    def.limits = {{"commute", cfg.tol.commute}, {"value_gap", cfg.tol.value}, {"feasibility", cfg.tol.feas}};
    def.control_threshold = 1e-3;
    def.notes = {"F(x - a) for F in schatten:2, schatten:3, sumsq, min and max over the orbit of a random b",
                 "trials where a has tied eigenvalues within a factor are skipped"};
    def.trial = [cfg, basis](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const AlgebraSpec& spec = cfg.algebra;
        const Element a = random_element(spec, rng);
        const Element b = random_orbit_generator(spec, rng);
        t.input("a", a);
        t.input("b", b);
        if (has_factor_ties(a)) {
            t.skip("a has tied eigenvalues");
            return t.finish();
        }
        const FeasibleSet set = FeasibleSet::orbit(b);
        double commute = 0.0, gap = 0.0, feas = 0.0, stat = 0.0;
        bool certified = true;
        std::optional<Element> control_from;
        int run = 0;
        for (const char* fname : {"schatten:2", "schatten:3", "sumsq"}) {
            const SpectralFunction F{specfun::parse_symmetric(fname), spec};
            for (Sense sense : {Sense::Min, Sense::Max}) {
                const Objective obj = Objective::shifted(F, a, sense);
                const auto res = opt::multistart(obj, set, solver_params(cfg, derive_seed(seed, 10 + run++)),
                                                 basis.get());
                const auto oracle = opt::permutation_oracle(a, b, F, sense);
                feas = std::max(feas, set.defect(res.x));
                stat = std::max(stat, res.stationarity);
                if (res.stationarity > cfg.stationarity) certified = false;
                commute = std::max(commute, commute_residual(res.x, a));
                gap = std::max(gap, std::abs(res.value - oracle.value) / (1.0 + std::abs(oracle.value)));
                if (!control_from) control_from = res.x;
            }
        }
        t.check("feasibility", feas, cfg.tol.feas);
        t.check("value_gap", gap, cfg.tol.value);
        t.residual("stationarity", stat);
        if (certified)
            t.check("commute", commute, cfg.tol.commute);
        else {
            t.residual("commute", commute);
            t.uncertified("a solution is not stationary");
        }
        if (auto xp = control_point(*control_from, *basis, rng)) t.residual("control", commute_residual(*xp, a));
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- normal cone

SuiteDef normalcone_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "normalcone";
    def.limits = {{"pairing_derivative", 1e-8}, {"tangent", 1e-8}};
    def.control_threshold = 1e-4;
    def.notes = {"D and H of unit Frobenius norm, H projected onto the orthogonal complement of Der(V)",
                 "central differences with h = 1e-5; control pairs exp(tD) with H in Der(V)"};
    if (basis->dimension() == 0) def.notes.push_back("Der(V) = {0}: only D = 0 is tested and there is no control");
    def.trial = [basis, spec = cfg.algebra](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const int n = spec.dim();
        const double h = 1e-5;
        const LinearMap d =
            basis->dimension() ? unit_derivation(*basis, rng) : LinearMap::zero(spec);
        Eigen::MatrixXd raw(n, n);
        for (int j = 0; j < n; ++j) raw.col(j) = random_normal(n, rng);
        LinearMap hp = lie::project_perp_derivations(LinearMap(spec, raw), *basis);
        hp = (1.0 / frobenius_norm(hp)) * hp;
        t.input("D", Eigen::Map<const Eigen::VectorXd>(d.matrix().data(), d.matrix().size()));
        t.input("H", Eigen::Map<const Eigen::VectorXd>(raw.data(), raw.size()));

        const Eigen::MatrixXd plus = lie::expm(h * d.matrix());
        const Eigen::MatrixXd minus = lie::expm(-h * d.matrix());
        const auto pairing = [&](const Eigen::MatrixXd& hm) {
            return (hm.cwiseProduct(plus).sum() - hm.cwiseProduct(minus).sum()) / (2.0 * h);
        };
        t.check("pairing_derivative", std::abs(pairing(hp.matrix())), 1e-8);
        t.check("tangent", ((plus - minus) / (2.0 * h) - d.matrix()).norm(), 1e-8);
        if (basis->dimension()) {
            const LinearMap hd = unit_derivation(*basis, rng);
            t.residual("control", std::abs(pairing(hd.matrix())));
        }
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- appendix

/// a constant on a random coarse partition, b strictly decreasing across
/// the blocks of a (possibly tied inside them), c on a frame rotated by the
/// stabilizer of b.
double transitivity_residual(const AlgebraSpec& spec, const lie::DerivationBasis& basis, Rng& rng, Trial& t) {
    const int n = spec.rank();
    const auto frame = spectral_decompose(random_element(spec, rng)).frame;
    Eigen::VectorXd alpha(n), beta(n);
    double av = 5.0, bv = 10.0;
    for (int i = 0; i < n; ++i) {
        const bool new_a_block = i == 0 || uniform(rng, 0.0, 1.0) < 0.5;
        if (i > 0) {
            if (new_a_block) {
                av -= uniform(rng, 0.5, 2.0);
                bv -= uniform(rng, 0.5, 2.0);
            } else if (uniform(rng, 0.0, 1.0) < 0.5) {
                bv -= uniform(rng, 0.5, 2.0);
            }
        }
        alpha[i] = av;
        beta[i] = bv;
    }
    const Element a = assemble(frame, alpha);
    const Element b = assemble(frame, beta);
    t.input("transitivity_a", a);
    t.input("transitivity_b", b);
    const auto stab = lie::stabilizer_derivations(basis, b);
    const lie::Automorphism x = stab.dimension() ? lie::exp_derivation(lie::random_derivation(stab, rng, 1.0))
                                             : lie::Automorphism{LinearMap::identity(spec), 0.0};
    const Eigen::VectorXd gamma = random_normal(n, rng);
    Element c = Element::zero(spec);
    for (int i = 0; i < n; ++i) c += gamma[i] * x(frame[std::size_t(i)]);
    t.input("transitivity_c", c);
    t.check("strong_ab", std::abs(strong_operator_commutes(a, b, 0.0).residual) / (1.0 + norm(a) * norm(b)), 1e-10);
    t.check("commute_bc", commute_residual(b, c), 1e-8);
    return commute_residual(a, c);
}

Element distinct_element(const AlgebraSpec& spec, Rng& rng) {
    const auto frame = spectral_decompose(random_element(spec, rng)).frame;
    Eigen::VectorXd l(spec.rank());
    double v = uniform(rng, -1.0, 1.0);
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        l[i] = v;
        v -= uniform(rng, 0.05, 1.0);
    }
    return assemble(frame, l);
}

SuiteDef appendix_def(const SuiteConfig& cfg) {
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "appendix";
    def.limits = {{"schatten1_boundary", 1e-12}, {"monotone_failures", 0.0}, {"transitivity", 1e-8}};
    def.notes = {"strict Schur for sumsq, powsum:1.5, powsum:3; strict convexity of sumsq; strict norms p = 1.5, 2, 3",
                 "schatten:1 boundary |e1 + e2|_1 = 2 on a random frame; monotone pairing for sumsq, powsum:1.5 and the strictly convex norms schatten:1.5, schatten:3",
                 "transitivity: a, b strongly commuting with b refining a, c commuting with b"};
    def.trial = [basis, spec = cfg.algebra](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const int n = spec.rank();

        double schur = kInf;
        int schur_bad = 0;
        if (n >= 2) {
            for (const auto& f : {specfun::sumsq(), specfun::power_sum(1.5), specfun::power_sum(3)}) {
                const auto r = specfun::check_strict_schur(f, 1, derive_seed(seed, 1), n);
                schur_bad += r.violations;
                if (r.trials > r.rejected) schur = std::min(schur, r.min_margin);
            }
            if (schur < kInf) t.check_margin("schur_margin", schur);
            t.check("schur_violations", double(schur_bad), 0.0);
        }

        const SpectralFunction sq{specfun::sumsq(), spec};
        const Element x = random_element(spec, rng);
        const Element y = random_element(spec, rng);
        t.input("x", x);
        t.input("y", y);
        t.check_margin("convexity_margin", 0.5 * (sq(x) + sq(y)) - sq(0.5 * (x + y)));

        for (double p : {1.5, 2.0, 3.0}) {
            const SpectralFunction F{specfun::schatten(p), spec};
            const Element u = (1.0 / F(x)) * x;
            const Element v = (1.0 / F(y)) * y;
            char key[32];
            std::snprintf(key, sizeof key, "norm_p%g_margin", p);
            t.check_margin(key, 2.0 - F(u + v));
        }

        if (n >= 2) {
            const auto frame = spectral_decompose(random_element(spec, rng)).frame;
            const SpectralFunction F1{specfun::schatten(1), spec};
            t.check("schatten1_boundary", std::abs(F1(frame[0] + frame[1]) - 2.0), 1e-12);
        }

        const Element z = distinct_element(spec, rng);
        t.input("z", z);
        int bad = 0;
        for (const auto& f : {specfun::sumsq(), specfun::power_sum(1.5), specfun::schatten(1.5), specfun::schatten(3)})
            if (!specfun::monotone_pairing_check(z, specfun::spectral_subgradient(SpectralFunction{f, spec}, z)))
                ++bad;
        t.check("monotone_failures", double(bad), 0.0);

        t.check("transitivity", transitivity_residual(spec, *basis, rng, t), 1e-8);
        return t.finish();
    };
    return def;
}

// ---------------------------------------------------------------- kappa

SuiteDef kappa_def(const SuiteConfig& cfg, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("demo_kappa: eps must be positive");
    const int n = cfg.algebra.rank();
    std::optional<Eigen::VectorXd> fixed;
    if (cfg.kappa_eigs) {
        if (cfg.kappa_eigs->size() != n)
            throw std::invalid_argument("demo_kappa: need " + std::to_string(n) + " eigenvalues for a");
        Eigen::VectorXd l = *cfg.kappa_eigs;
        std::sort(l.data(), l.data() + l.size(), std::greater<double>());
        if (!(l[n - 1] > eps)) throw std::invalid_argument("demo_kappa: infeasible eps, need lambda_min(a) > eps");
        fixed = l;
    }
    auto basis = std::make_shared<lie::DerivationBasis>(lie::derivation_basis(cfg.algebra));
    SuiteDef def;
    def.name = "kappa";
    def.limits = {{"kappa_increase", 1e-12}, {"oracle_gap", 1e-4}};
    def.notes = {"minimize kappa(x + a) over the spectral box [-eps, eps]^n with spectralbox_descent from x = 0",
                 "commutation of x and a is reported as a diagnostic only"};
    def.trial = [cfg, eps, fixed, basis, n](int index, std::uint64_t seed) {
        Trial t(index, seed);
        Rng rng(seed);
        const AlgebraSpec& spec = cfg.algebra;
        Eigen::VectorXd l(n);
        if (fixed) {
            l = *fixed;
        } else {
            for (int i = 0; i < n; ++i) l[i] = eps + uniform(rng, 0.05, 3.0);
            std::sort(l.data(), l.data() + n, std::greater<double>());
        }
        const auto frame = spectral_decompose(random_element(spec, rng)).frame;
        const Element a = assemble(frame, l);
        t.input("a", a);
        const FeasibleSet box = FeasibleSet::spectral_box(spec, Eigen::VectorXd::Constant(n, -eps),
                                                          Eigen::VectorXd::Constant(n, eps));
        const Objective obj = Objective::kappa(a);
        SolverParams p = solver_params(cfg, derive_seed(seed, 1));
        p.starts = 1;
        const auto res = opt::spectralbox_descent(obj, box, Element::zero(spec), p, basis.get());
        const double ka = specfun::condition_number(a);
        const double kx = specfun::condition_number(res.x + a);
        const double oracle = opt::kappa_clipping_oracle(l, eps);
        t.residual("kappa_a", ka);
        t.residual("kappa_x", kx);
        t.residual("kappa_oracle", oracle);
        t.check("feasibility", box.defect(res.x), cfg.tol.feas);
        t.check("kappa_increase", std::max(0.0, kx - ka), 1e-12);
        t.check("oracle_gap", std::abs(kx - oracle), 1e-4);
        t.residual("commute_diagnostic", commute_residual(res.x, a));
        return t.finish();
    };
    return def;
}

SuiteDef definition(const std::string& name, const SuiteConfig& cfg) {
    if (name == "smooth") return smooth_def(cfg);
    if (name == "max") return max_def(cfg);
    if (name == "min") return min_def(cfg);
    if (name == "shifted") return shifted_def(cfg);
    if (name == "normalcone") return normalcone_def(cfg);
    if (name == "appendix") return appendix_def(cfg);
    if (name == "kappa") return kappa_def(cfg, cfg.eps);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace

void SuiteConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("SuiteConfig: trials must be >= 1");
    if (starts < 1) throw std::invalid_argument("SuiteConfig: starts must be >= 1");
    for (double v : {tol.commute, tol.feas, tol.value, stationarity})
        if (!(v > 0.0)) throw std::invalid_argument("SuiteConfig: tolerances must be positive");
}

std::string hash_inputs(const std::vector<const Eigen::VectorXd*>& parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto* v : parts) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(v->data());
        for (std::size_t i = 0; i < std::size_t(v->size()) * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Eigen::VectorXd simplex_commutation_search(const Element& x, const std::vector<Element>& generators,
                                           Eigen::VectorXd w, int iterations) {
    const int m = static_cast<int>(generators.size());
    if (m == 0) throw std::invalid_argument("simplex_commutation_search: no generators");
    if (w.size() != m) throw std::invalid_argument("simplex_commutation_search: weight size mismatch");
    const Eigen::MatrixXd lx = lyapunov_map(x).matrix();
    std::vector<Eigen::MatrixXd> k;
    for (const auto& c : generators) {
        const Eigen::MatrixXd p = lx * lyapunov_map(c).matrix();
        k.push_back(p - p.transpose());
    }
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = k[std::size_t(i)].cwiseProduct(k[std::size_t(j)]).sum();

    const auto project = [](const Eigen::VectorXd& v) {
        Eigen::VectorXd u = v;
        std::sort(u.data(), u.data() + u.size(), std::greater<double>());
        double cum = 0.0, theta = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            cum += u[i];
            const double t = (cum - 1.0) / double(i + 1);
            if (u[i] - t > 0.0) theta = t;
        }
        return Eigen::VectorXd((v.array() - theta).max(0.0));
    };
    w = project(w);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) return w;
    const double step = 1.0 / lmax;
    Eigen::VectorXd best = w;
    double best_phi = w.dot(g * w);
    // FISTA momentum on the simplex-constrained quadratic wᵀGw.
    Eigen::VectorXd y = w, prev = w;
    double tk = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd next = project(y - step * (g * y));
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = next + ((tk - 1.0) / tn) * (next - prev);
        prev = next;
        tk = tn;
        const double phi = next.dot(g * next);
        if (phi < best_phi) {
            best_phi = phi;
            best = next;
        }
    }
    return best;
}

MinCertificate certify_min_principle(const Objective& hard, const FeasibleSet& set, const SuiteConfig& cfg,
                                     const lie::DerivationBasis& basis, std::uint64_t seed,
                                     const std::optional<Element>& x0) {
    if (hard.kind != Objective::Kind::MaxAffine)
        throw std::invalid_argument("certify_min_principle: objective must be max-affine");
    if (set.kind() != FeasibleSet::Kind::Orbit)
        throw std::invalid_argument("certify_min_principle: feasible set must be an orbit");
    const double scale = affine_scale(hard, set.b());
    SolverParams p;
    p.seed = seed;
    p.starts = cfg.starts;
    p.commute_tol = cfg.tol.commute;

    Objective smooth = hard;
    smooth.sense = Sense::Min;
    opt::OptResult res;
    for (int k = 1; k <= 9; ++k) {
        smooth.smoothing = scale * std::pow(10.0, -k);
        if (k == 1 && !x0) {
            res = opt::multistart(smooth, set, p, &basis);
        } else {
            SolverParams warm = p;
            warm.starts = 1;
            res = opt::orbit_descent(smooth, set, k == 1 ? x0 : std::optional<Element>(res.x), warm, &basis);
        }
    }

    MinCertificate out;
    out.x = res.x;
    out.stationarity = res.stationarity;
    const Eigen::VectorXd z = hard.affine_values(res.x);
    const double zmax = z.maxCoeff();
    const Eigen::VectorXd soft = smooth.affine_weights(res.x);
    std::vector<Element> active;
    Eigen::VectorXd w0(0);
    for (int j = 0; j < z.size(); ++j)
        if (zmax - z[j] <= 1e-7 * scale) {
            out.active.push_back(j);
            active.push_back(hard.generators[std::size_t(j)]);
            w0.conservativeResize(w0.size() + 1);
            w0[w0.size() - 1] = soft[j];
        }
    if (w0.sum() > 0.0)
        w0 /= w0.sum();
    else
        w0.setConstant(1.0 / double(w0.size()));

    const auto combine = [&](const Eigen::VectorXd& w) {
        Element v = Element::zero(set.algebra());
        for (std::size_t j = 0; j < active.size(); ++j) v += w[Eigen::Index(j)] * active[j];
        return v;
    };
    out.initial_residual = commute_residual(res.x, combine(w0));
    out.weights = simplex_commutation_search(res.x, active, w0, 500);
    out.residual = commute_residual(res.x, combine(out.weights));
    return out;
}

WitnessInstance midpoint_witness_instance() {
    Eigen::MatrixXd m(2, 2), p(2, 2), b(2, 2);
    m << -1, 0, 0, 1;
    p << 0, 0.5, 0.5, 0;
    b << 1, 0, 0, -1;
    const Element mid = sym_element(m);
    const Element pert = sym_element(p);
    Objective obj = Objective::max_affine({mid + pert, mid - pert}, Eigen::VectorXd::Zero(2), Sense::Min, 0.0,
                                          SpectralFunction{specfun::schatten(2), mid.algebra()});
    return {obj, FeasibleSet::orbit(sym_element(b)), sym_element(b)};
}

SuiteReport verify_smooth_principle(const SuiteConfig& cfg) { return (cfg.validate(), run(smooth_def(cfg), cfg)); }
SuiteReport verify_max_principle(const SuiteConfig& cfg) { return (cfg.validate(), run(max_def(cfg), cfg)); }
SuiteReport verify_min_principle(const SuiteConfig& cfg) { return (cfg.validate(), run(min_def(cfg), cfg)); }
SuiteReport verify_shifted_principle(const SuiteConfig& cfg) { return (cfg.validate(), run(shifted_def(cfg), cfg)); }
SuiteReport verify_normal_cone(const SuiteConfig& cfg) { return (cfg.validate(), run(normalcone_def(cfg), cfg)); }
SuiteReport verify_appendix(const SuiteConfig& cfg) { return (cfg.validate(), run(appendix_def(cfg), cfg)); }
SuiteReport demo_kappa(const SuiteConfig& cfg, double eps) { return (cfg.validate(), run(kappa_def(cfg, eps), cfg)); }

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"smooth", "max", "min", "shifted", "normalcone", "appendix", "kappa"};
    return names;
}

bool is_suite_name(const std::string& name) {
    const auto& n = suite_names();
    return name == "all" || std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<SuiteReport> run_suite(const std::string& name, const SuiteConfig& cfg) {
    cfg.validate();
    if (!is_suite_name(name)) throw std::invalid_argument("unknown suite '" + name + "'");
    std::vector<SuiteReport> out;
    for (const auto& s : suite_names())
        if (name == "all" || name == s) out.push_back(run(definition(s, cfg), cfg));
    return out;
}

TrialRecord replay_trial(const std::string& name, const SuiteConfig& cfg, int index) {
    cfg.validate();
    if (index < 0 || index >= cfg.trials) throw std::out_of_range("replay_trial: index out of range");
    const SuiteDef def = definition(name, cfg);
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
    try {
        return def.trial(index, seed);
    } catch (const std::exception& e) {
        TrialRecord r;
        r.index = index;
        r.seed = seed;
        r.passed = false;
        r.note = std::string("exception: ") + e.what();
        return r;
    }
}

}  // namespace eja::verify
