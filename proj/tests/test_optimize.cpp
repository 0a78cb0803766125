#include <cmath>

#include "doctest.h"
#include "eja/optimize.hpp"
#include "test_support.hpp"

using namespace eja;
using namespace eja::opt;
using specfun::SpectralFunction;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Element diag(std::initializer_list<double> xs) { return sym_element(Eigen::MatrixXd(vec(xs).asDiagonal())); }

Element with_spectrum(const AlgebraSpec& spec, const Eigen::VectorXd& l, Rng& rng) {
    return assemble(spectral_decompose(random_element(spec, rng)).frame, l);
}

void check_monotone(const OptResult& r, Sense sense) {
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        const double step = r.history[i] - r.history[i - 1];
        const double slack = 1e-12 * (1 + std::abs(r.history[i - 1]));
        if (sense == Sense::Min)
            CHECK(step <= slack);
        else
            CHECK(step >= -slack);
    }
}

}  // namespace

TEST_CASE("feasible sets") {
    const auto s3 = AlgebraSpec::parse("sym:3");
    CHECK_THROWS_AS(FeasibleSet::spectral_box(s3, vec({1, 0, 0}), vec({0, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(FeasibleSet::spectral_box(s3, vec({0, 1, 0}), vec({2, 2, 2})), std::invalid_argument);
    CHECK_THROWS_AS(FeasibleSet::spectral_box(s3, vec({0, 0}), vec({1, 1})), std::invalid_argument);
    const auto box = FeasibleSet::spectral_box(s3, vec({0, -1, -1}), vec({2, 1, 0}));
    CHECK((box.project_eigenvalues(vec({5, -3, 0.5})) - vec({2, -1, 0.5})).norm() == 0.0);
    // the order of the input is kept
    CHECK((box.project_eigenvalues(vec({-3, 5, 0.5})) - vec({-1, 2, 0.5})).norm() == 0.0);
    CHECK(box.contains(diag({1, 0.5, -0.5})));
    CHECK_FALSE(box.contains(diag({3, 0.5, -0.5})));
    CHECK(box.defect(diag({3, 0.5, -0.5})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(box.b(), std::invalid_argument);

    Rng rng(50);
    const auto b = random_element(s3, rng);
    const auto orbit = FeasibleSet::orbit(b);
    const auto basis = lie::derivation_basis(s3);
    CHECK(orbit.contains(lie::random_automorphism(basis, rng, 2.0)(b)));
    CHECK_FALSE(orbit.contains(b + 0.1 * unit(s3)));

    // product orbits keep each factor's spectrum
    const auto p = AlgebraSpec::parse("prod(sym:2,sym:2)");
    const auto x = join(p, std::vector<Element>{diag({3, 1}), diag({2, 0})});
    const auto swapped = join(p, std::vector<Element>{diag({3, 2}), diag({1, 0})});
    CHECK((eigenvalue_map(x) - eigenvalue_map(swapped)).norm() == 0.0);
    CHECK_FALSE(FeasibleSet::orbit(x).contains(swapped));
}

TEST_CASE("objective variants") {
    Rng rng(51);
    const auto spec = AlgebraSpec::parse("spin:4");
    const Element x = random_element(spec, rng);
    const Element c = random_element(spec, rng);
    const SpectralFunction f2{specfun::schatten(2), spec};
    CHECK(Objective::linear(c).value(x) == doctest::Approx(inner(c, x)));
    CHECK(Objective::linear(c, Sense::Min, f2).value(x) == doctest::Approx(inner(c, x) + f2(x)));
    CHECK(Objective::shifted(f2, c).value(x) == doctest::Approx(f2(x - c)));

    const LinearMap m(spec, Eigen::MatrixXd::Random(4, 4));
    const auto q = Objective::quadratic(m, c);
    // central differences of the quadratic
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
        const Element e(spec, Eigen::VectorXd::Unit(4, i));
        CHECK((q.value(x + h * e) - q.value(x - h * e)) / (2 * h) ==
              doctest::Approx(q.gradient(x)[i]).epsilon(1e-6));
    }

    std::vector<Element> gens{random_element(spec, rng), random_element(spec, rng), random_element(spec, rng)};
    const Eigen::VectorXd d = random_normal(3, rng);
    const auto hard = Objective::max_affine(gens, d);
    const Eigen::VectorXd z = hard.affine_values(x);
    CHECK(hard.value(x) == z.maxCoeff());
    const auto soft = Objective::max_affine(gens, d, Sense::Min, 1e-3);
    CHECK(soft.value(x) >= z.maxCoeff());
    CHECK(soft.value(x) <= z.maxCoeff() + 1e-3 * std::log(3.0) + 1e-15);
    CHECK(soft.affine_weights(x).sum() == doctest::Approx(1.0));

    const Element a = 3.0 * unit(spec);
    const auto k = Objective::kappa(a);
    CHECK(k.value(Element::zero(spec)) == doctest::Approx(1.0));
    CHECK(std::isinf(k.value(-3.0 * unit(spec))));
    CHECK_THROWS_AS(Objective::shifted(f2, unit(AlgebraSpec::parse("sym:2"))), AlgebraMismatch);
    CHECK_THROWS_AS(Objective::max_affine({}, Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("permutation_oracle") {
    const SpectralFunction f2{specfun::schatten(2), AlgebraSpec::parse("sym:2")};
    const Element a = diag({2, 1});
    const Element b = diag({5, 3});
    const auto lo = permutation_oracle(a, b, f2, Sense::Min);
    CHECK(lo.value == doctest::Approx(std::sqrt(13.0)).epsilon(1e-14));
    CHECK(norm(lo.x - diag({5, 3})) <= 1e-14);
    const auto hi = permutation_oracle(a, b, f2, Sense::Max);
    CHECK(hi.value == doctest::Approx(std::sqrt(17.0)).epsilon(1e-14));
    CHECK(norm(hi.x - diag({3, 5})) <= 1e-14);
    CHECK(lo.iterations == 2);
    CHECK(lo.diagnostics.residual("x vs a") <= 1e-15);

    const auto one = permutation_oracle(a, 4.0 * unit(a.algebra()), f2, Sense::Min);
    CHECK(one.iterations == 1);
    CHECK(one.value == doctest::Approx(f2(4.0 * unit(a.algebra()) - a)));
    CHECK_THROWS_AS(permutation_oracle(diag({1, 1}), b, f2, Sense::Min), std::invalid_argument);
    CHECK_THROWS_AS(permutation_oracle(Objective::kappa(a), b), std::invalid_argument);

    Rng rng(52);
    SUBCASE("products permute within factors only") {
        const auto p = AlgebraSpec::parse("prod(sym:3,spin:4,rn:2)");
        const Element pa = random_element(p, rng);
        const Element pb = random_element(p, rng);
        const auto cands = permutation_candidates(pa, pb);
        CHECK(cands.size() == 12);
        const auto set = FeasibleSet::orbit(pb);
        for (const auto& x : cands) {
            CHECK(set.contains(x, 1e-10));
            CHECK(operator_commutes(x, pa, 1e-10).commutes);
        }
    }
    SUBCASE("candidates include every orbit point commuting with a") {
        const auto s = AlgebraSpec::parse("sym:3");
        const Element sa = random_element(s, rng);
        const Element sb = random_element(s, rng);
        CHECK(permutation_candidates(sa, sb).size() == 6);
        CHECK_THROWS_AS(permutation_candidates(random_element(AlgebraSpec::parse("rn:10"), rng),
                                               random_element(AlgebraSpec::parse("rn:10"), rng)),
                        std::invalid_argument);
    }
}

TEST_CASE("orbit_descent") {
    Rng rng(53);
    SolverParams params;
    SUBCASE("shifted schatten-2 on a shared frame starting from b") {
        const auto spec = AlgebraSpec::parse("sym:3");
        const auto frame = spectral_decompose(random_element(spec, rng)).frame;
        const Element a = assemble(frame, vec({3, 1, -1}));
        const Element b = assemble(frame, vec({2, 0.5, -2}));
        const SpectralFunction f2{specfun::schatten(2), spec};
        for (Sense sense : {Sense::Min, Sense::Max}) {
            const auto obj = Objective::shifted(f2, a, sense);
            const auto set = FeasibleSet::orbit(b);
            const auto r = orbit_descent(obj, set, std::nullopt, params);
            const auto o = permutation_oracle(a, b, f2, sense);
            if (sense == Sense::Min) CHECK(std::abs(r.value - o.value) <= 1e-6);
            CHECK(set.contains(r.x));
            check_monotone(r, sense);
        }
    }
    SUBCASE("zero derivation space returns x0") {
        const auto spec = AlgebraSpec::parse("rn:4");
        const Element b = random_element(spec, rng);
        const auto r = orbit_descent(Objective::linear(random_element(spec, rng)), FeasibleSet::orbit(b),
                                     std::nullopt, params);
        CHECK(r.iterations == 0);
        CHECK(r.x.coords() == b.coords());
        CHECK(r.converged);
    }
    SUBCASE("constant objective stops at x0") {
        const auto spec = AlgebraSpec::parse("sym:3");
        const Element b = random_element(spec, rng);
        const SpectralFunction zero{specfun::zero_function(), spec};
        const auto r = orbit_descent(Objective::shifted(zero, random_element(spec, rng)), FeasibleSet::orbit(b),
                                     std::nullopt, params);
        CHECK(r.iterations == 0);
        CHECK(r.stationarity == 0.0);
        CHECK(r.x.coords() == b.coords());
    }
    SUBCASE("x0 off the orbit is replaced by b") {
        const auto spec = AlgebraSpec::parse("sym:3");
        const Element b = random_element(spec, rng);
        SolverParams once = params;
        once.max_iters = 0;
        const auto r = orbit_descent(Objective::linear(unit(spec)), FeasibleSet::orbit(b),
                                     b + unit(spec), once);
        CHECK(r.x.coords() == b.coords());
    }
    SUBCASE("feasibility, monotonicity and the stationarity link") {
        for (const char* name : {"sym:3", "sym:4", "spin:5", "prod(sym:3,spin:4)"}) {
            const auto spec = AlgebraSpec::parse(name);
            const auto basis = lie::derivation_basis(spec);
            for (int t = 0; t < 10; ++t) {
                const Element b = random_element(spec, rng);
                const auto set = FeasibleSet::orbit(b);
                const LinearMap m(spec, [&] {
                    Eigen::MatrixXd r = Eigen::MatrixXd::Random(spec.dim(), spec.dim());
                    return Eigen::MatrixXd(r + r.transpose());
                }());
                const Element c = random_element(spec, rng);
                for (Sense sense : {Sense::Min, Sense::Max}) {
                    const auto obj = Objective::quadratic(m, c, sense);
                    const auto x0 = multistart_points(set, 1, std::uint64_t(t), params.spread, &basis)[0];
                    const auto r = orbit_descent(obj, set, x0, params, &basis);
                    CHECK(set.defect(r.x) <= 1e-8);
                    check_monotone(r, sense);
                    CHECK(r.converged);
                    const Element v = obj.gradient(r.x);
                    double pairing = 0.0;
                    for (const auto& w : lie::orbit_tangent(r.x, basis)) pairing = std::max(pairing, std::abs(inner(v, w)));
                    CHECK(pairing <= 10 * params.tol);
                    CHECK(r.diagnostics.residual("x vs gradient") <= 1e-6);
                }
            }
        }
    }
    CHECK_THROWS_AS(orbit_descent(Objective::linear(unit(AlgebraSpec::parse("sym:2"))),
                                  FeasibleSet::spectral_box(AlgebraSpec::parse("sym:2"), vec({0, 0}), vec({1, 1})),
                                  std::nullopt, params),
                    std::invalid_argument);
}

TEST_CASE("spectralbox_descent") {
    Rng rng(54);
    SolverParams params;
    const auto spec = AlgebraSpec::parse("sym:3");
    SUBCASE("constant objective returns x0") {
        const auto box = FeasibleSet::spectral_box(spec, vec({-1, -1, -1}), vec({1, 1, 1}));
        const Element x0 = with_spectrum(spec, vec({0.5, 0.2, -0.3}), rng);
        const SpectralFunction zero{specfun::zero_function(), spec};
        const auto r = spectralbox_descent(Objective::shifted(zero, unit(spec)), box, x0, params);
        CHECK(r.iterations == 0);
        CHECK(norm(r.x - x0) <= 1e-12);
    }
    SUBCASE("kappa reduces the condition number") {
        for (int t = 0; t < 10; ++t) {
            const Element a = with_spectrum(spec, vec({4 + uniform(rng, 0, 2), 2, 1 + uniform(rng, 0, 0.5)}), rng);
            const double eps = 0.4;
            const auto box = FeasibleSet::spectral_box(spec, Eigen::VectorXd::Constant(3, -eps),
                                                       Eigen::VectorXd::Constant(3, eps));
            const auto obj = Objective::kappa(a);
            const auto r = spectralbox_descent(obj, box, Element::zero(spec), params);
            CHECK(r.value <= specfun::condition_number(a) + 1e-12);
            CHECK(box.contains(r.x));
            check_monotone(r, Sense::Min);
            CHECK(r.value == doctest::Approx(kappa_clipping_oracle(eigenvalue_map(a), eps)).epsilon(1e-6));
        }
    }
    SUBCASE("collapsed box pins the eigenvalues") {
        const Eigen::VectorXd u = vec({1, 0, -1});
        const auto box = FeasibleSet::spectral_box(spec, u, u);
        const Element a = with_spectrum(spec, vec({3, 2, 1.5}), rng);
        const Element x0 = with_spectrum(spec, u, rng);
        const auto r = spectralbox_descent(Objective::kappa(a), box, x0, params);
        CHECK((eigenvalue_map(r.x) - u).norm() <= 1e-10);
        CHECK(r.value <= Objective::kappa(a).value(x0) + 1e-12);
    }
    SUBCASE("shifted objective matches the unconstrained minimizer when it is feasible") {
        const auto box = FeasibleSet::spectral_box(spec, vec({-2, -2, -2}), vec({2, 2, 2}));
        const Element a = with_spectrum(spec, vec({1.5, 0.3, -1}), rng);
        const auto r = spectralbox_descent(Objective::shifted(SpectralFunction{specfun::sumsq(), spec}, a), box,
                                           std::nullopt, params);
        CHECK(norm(r.x - a) <= 1e-6);
    }
}

TEST_CASE("multistart") {
    Rng rng(55);
    const auto spec = AlgebraSpec::parse("sym:4");
    const auto basis = lie::derivation_basis(spec);
    const Element a = random_element(spec, rng);
    const Element b = random_element(spec, rng);
    const auto set = FeasibleSet::orbit(b);
    const SpectralFunction f2{specfun::schatten(2), spec};
    const auto obj = Objective::shifted(f2, a);
    SolverParams params;
    params.seed = 99;

    const auto single = multistart(obj, set, params, &basis);
    const auto direct = orbit_descent(obj, set, multistart_points(set, 1, 99, params.spread, &basis)[0], params, &basis);
    CHECK(single.value == direct.value);
    CHECK(single.x.coords() == direct.x.coords());

    const auto lin = Objective::linear(a);
    params.starts = 8;
    const auto eight = multistart(lin, set, params, &basis);
    params.starts = 1;
    const auto one = multistart(lin, set, params, &basis);
    CHECK(std::abs(eight.value - one.value) <= 1e-6);

    params.starts = 8;
    const auto r1 = multistart(obj, set, params, &basis);
    const auto r2 = multistart(obj, set, params, &basis);
    CHECK(r1.x.coords() == r2.x.coords());
    CHECK(r1.start == r2.start);
    const auto o = permutation_oracle(a, b, f2, Sense::Min);
    CHECK(std::abs(r1.value - o.value) <= 1e-6);
    CHECK(r1.diagnostics.residual("x vs a") <= 1e-6);
    params.starts = 0;
    CHECK_THROWS_AS(multistart(obj, set, params, &basis), std::invalid_argument);
}

TEST_CASE("oracle dominance for strictly convex objectives") {
    Rng rng(56);
    for (const char* name : {"sym:3", "spin:5", "prod(sym:3,spin:4)"}) {
        const auto spec = AlgebraSpec::parse(name);
        const auto basis = lie::derivation_basis(spec);
        for (int t = 0; t < 5; ++t) {
            const Element a = random_element(spec, rng);
            const Element b = random_element(spec, rng);
            const auto set = FeasibleSet::orbit(b);
            for (const auto& f : {specfun::sumsq(), specfun::schatten(3)}) {
                const SpectralFunction F{f, spec};
                const auto o = permutation_oracle(a, b, F, Sense::Min);
                SolverParams params;
                params.seed = std::uint64_t(t);
                const auto single = orbit_descent(Objective::shifted(F, a), set,
                                                  multistart_points(set, 1, std::uint64_t(t), params.spread, &basis)[0],
                                                  params, &basis);
                CHECK(single.value >= o.value - 1e-6);
                params.starts = 8;
                const auto best = multistart(Objective::shifted(F, a), set, params, &basis);
                CHECK(std::abs(best.value - o.value) <= 1e-6);
            }
        }
    }
}

TEST_CASE("kappa_clipping_oracle") {
    CHECK(kappa_clipping_oracle(vec({4, 2, 1}), 0.5) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(kappa_clipping_oracle(vec({2, 2, 2}), 0.1) == 1.0);
    CHECK(kappa_clipping_oracle(vec({3, 1}), 1.0) == 1.0);
    CHECK_THROWS_AS(kappa_clipping_oracle(vec({3, -1}), 0.5), std::domain_error);
}
