#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "eja/liegroup.hpp"
#include "eja/specfun.hpp"
#include "test_support.hpp"

using namespace eja;
using namespace eja::specfun;
using eja::testing::sample_algebras;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

SymmetricFunction sum_exp() {
    SymmetricFunction f;
    f.name = "sumexp";
    f.value = [](const Eigen::VectorXd& u) { return u.array().exp().sum(); };
    f.subgradient = [](const Eigen::VectorXd& u) -> Eigen::VectorXd { return u.array().exp().matrix(); };
    f.is_convex = true;
    f.is_strictly_convex = true;
    return f;
}

Element distinct_element(const AlgebraSpec& spec, Rng& rng) {
    const auto frame = spectral_decompose(random_element(spec, rng)).frame;
    Eigen::VectorXd l(spec.rank());
    for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = double(l.size() - i) + 0.3 * uniform(rng, -1, 1);
    return assemble(frame, l);
}

}  // namespace

TEST_CASE("schatten") {
    CHECK(schatten(2)(vec({3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(schatten(1)(vec({1, -1})) == 2.0);
    CHECK(schatten(3)(vec({1, 2})) == doctest::Approx(std::cbrt(9.0)).epsilon(1e-14));
    CHECK(schatten(2).is_strictly_convex_norm);
    CHECK(schatten(1.5).is_strictly_convex_norm);
    CHECK_FALSE(schatten(1).is_strictly_convex_norm);
    CHECK(schatten(1).is_norm);
    CHECK_THROWS_AS(schatten(0.5), std::invalid_argument);
    CHECK_THROWS_AS(schatten(std::numeric_limits<double>::infinity()), std::invalid_argument);
    CHECK(schatten(3).name == "schatten:3");
    CHECK(schatten(1.5).name == "schatten:1.5");
    CHECK(parse_symmetric("schatten:2.5").name == "schatten:2.5");
    CHECK(parse_symmetric("sumsq")(vec({1, 2})) == 5.0);
    CHECK_THROWS_AS(parse_symmetric("schatten:x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_symmetric("nope"), std::invalid_argument);
}

TEST_CASE("power_sum") {
    CHECK(power_sum(3)(vec({1, -2})) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(power_sum(1.5)(vec({4, 0})) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(power_sum(3).subgradient(vec({1, -2})).isApprox(vec({3, -12})));
    CHECK(power_sum(1.5).is_strictly_convex);
    CHECK_FALSE(power_sum(1.5).is_norm);
    CHECK(parse_symmetric("powsum:2.5").name == "powsum:2.5");
    CHECK_THROWS_AS(power_sum(1.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_symmetric("powsum:"), std::invalid_argument);
    const auto r = check_strict_schur(power_sum(1.5), 500, 37);
    CHECK(r.violations == 0);
    CHECK(r.min_margin > 0.0);
}

TEST_CASE("symmetric function invariants") {
    Rng rng(30);
    std::vector<SymmetricFunction> fs{schatten(1), schatten(1.5), schatten(2), schatten(3), sumsq(), sum_exp(), power_sum(3)};
    for (const auto& f : fs) {
        CAPTURE(f.name);
        for (int t = 0; t < 100; ++t) {
            const Eigen::VectorXd u = random_normal(5, rng, 2.0);
            Eigen::VectorXd pu = u;
            std::shuffle(pu.data(), pu.data() + pu.size(), rng);
            CHECK(std::abs(f(pu) - f(u)) <= 1e-12 * (1 + std::abs(f(u))));
            const Eigen::VectorXd g = f.subgradient(u);
            const Eigen::VectorXd w = random_normal(5, rng, 3.0);
            CHECK(f(w) >= f(u) + g.dot(w - u) - 1e-12 * (1 + std::abs(f(w))));
        }
    }
}

TEST_CASE("spectral_value") {
    Rng rng(31);
    const auto s3 = AlgebraSpec::parse("sym:3");
    const auto frame = spectral_decompose(random_element(s3, rng)).frame;
    const SpectralFunction nuc{schatten(1), s3};
    CHECK(nuc(frame[0] + frame[1]) == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& spec : sample_algebras()) {
        const SpectralFunction F{schatten(2), spec};
        CHECK(F(unit(spec)) == doctest::Approx(std::sqrt(double(spec.rank()))).epsilon(1e-14));
        const auto basis = lie::derivation_basis(spec);
        const Element a = random_element(spec, rng);
        for (int t = 0; t < 10; ++t) {
            const auto x = lie::random_automorphism(basis, rng, 1.0);
            CHECK(std::abs(F(x(a)) - F(a)) <= 1e-10 * (1 + F(a)));
        }
    }
}

TEST_CASE("spectral_subgradient") {
    Rng rng(32);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        const Element x = random_element(spec, rng);
        const SpectralFunction F2{schatten(2), spec};
        const Element v = spectral_subgradient(F2, x);
        CHECK(norm(v - (1.0 / eigenvalue_map(x).norm()) * x) <= 1e-12);
        CHECK(norm(spectral_subgradient(F2, Element::zero(spec))) == 0.0);

        const SpectralFunction Fs{sumsq(), spec};
        CHECK(norm(spectral_subgradient(Fs, x) - 2.0 * x) <= 1e-12 * (1 + norm(x)));
        // central differences of F along the basis
        Eigen::VectorXd fd(spec.dim());
        const double h = 1e-5;
        for (int i = 0; i < spec.dim(); ++i) {
            const Element e(spec, Eigen::VectorXd::Unit(spec.dim(), i));
            fd[i] = (Fs(x + h * e) - Fs(x - h * e)) / (2 * h);
        }
        CHECK((fd - 2.0 * x.coords()).norm() <= 1e-6 * (1 + norm(x)));

        for (const auto& f : {schatten(1), schatten(1.5), schatten(3), sumsq(), sum_exp()}) {
            const SpectralFunction F{f, spec};
            const Element g = spectral_subgradient(F, x);
            CHECK(is_subgradient(F, x, g).accepted);
            CHECK(strong_operator_commutes(g, x, 1e-10).commutes);
        }
    }
    SUBCASE("ties get block-constant coefficients") {
        const auto spec = AlgebraSpec::parse("sym:4");
        const auto frame = spectral_decompose(random_element(spec, rng)).frame;
        const Element x = assemble(frame, vec({2, 2, -1, -1}));
        const SpectralFunction F{schatten(1), spec};
        const Element v = spectral_subgradient(F, x);
        CHECK((eigenvalue_map(v) - vec({1, 1, -1, -1})).norm() <= 1e-10);
        CHECK(is_subgradient(F, x, v).accepted);
        CHECK(strong_operator_commutes(v, x, 1e-10).commutes);
    }
    CHECK_THROWS_AS(spectral_subgradient(SpectralFunction{schatten(2), AlgebraSpec::parse("sym:2")},
                                         unit(AlgebraSpec::parse("sym:3"))),
                    AlgebraMismatch);
}

TEST_CASE("is_subgradient") {
    Rng rng(33);
    for (const auto& spec : sample_algebras()) {
        const SpectralFunction F{schatten(2), spec};
        const Element x = random_element(spec, rng);
        const double n = eigenvalue_map(x).norm();
        CHECK(is_subgradient(F, x, (1.0 / n) * x).accepted);
        const auto bad = is_subgradient(F, x, (2.0 / n) * x);
        CHECK_FALSE(bad.accepted);
        CHECK(bad.worst_inequality < -1e-9);
        // right magnitude, wrong frame
        const Element y = random_element(spec, rng);
        if (!operator_commutes(x, y, 1e-6).commutes) {
            const auto off = is_subgradient(F, x, (1.0 / eigenvalue_map(y).norm()) * y);
            CHECK_FALSE(off.accepted);
        }
    }
    SpectralFunction nonconvex{schatten(2), AlgebraSpec::parse("sym:2")};
    nonconvex.f.is_convex = false;
    CHECK_THROWS_AS(is_subgradient(nonconvex, unit(nonconvex.algebra), unit(nonconvex.algebra)),
                    std::invalid_argument);
}

TEST_CASE("majorizes") {
    CHECK(majorizes(vec({1, 1}), vec({2, 0})));
    CHECK_FALSE(majorizes(vec({3, 1}), vec({2, 2})));
    CHECK(majorizes(vec({3, 1, 2}), vec({3, 1, 2})));
    CHECK(majorizes(vec({0, 2}), vec({2, 0})));
    CHECK_FALSE(majorizes(vec({1, 1}), vec({2, 1})));
    CHECK_THROWS_AS(majorizes(vec({1}), vec({1, 2})), std::invalid_argument);

    SUBCASE("λ(x+y) ≺ λ(x)+λ(y)") {
        Rng rng(34);
        for (const auto& spec : sample_algebras()) {
            int failures = 0;
            for (int t = 0; t < 1000; ++t) {
                const Element x = random_element(spec, rng);
                const Element y = random_element(spec, rng);
                if (!majorizes(eigenvalue_map(x + y), eigenvalue_map(x) + eigenvalue_map(y))) ++failures;
            }
            CHECK(failures == 0);
        }
    }
}

TEST_CASE("check_strict_schur") {
    CHECK(sumsq()(vec({1, 1})) < sumsq()(vec({2, 0})));
    CHECK_THROWS_AS(check_strict_schur(schatten(1), 10, 1), std::invalid_argument);
    const auto r = check_strict_schur(sumsq(), 1000, 35);
    CHECK(r.trials == 1000);
    CHECK(r.violations == 0);
    CHECK(r.min_margin > 0.0);
    const auto e = check_strict_schur(sum_exp(), 1000, 36, 5);
    CHECK(e.violations == 0);
}

TEST_CASE("condition_number") {
    const auto s3 = AlgebraSpec::parse("sym:3");
    Eigen::MatrixXd d = vec({2, 4, 1}).asDiagonal();
    CHECK(condition_number(sym_element(d)) == 4.0);
    CHECK(condition_number(2.5 * unit(s3)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(condition_number(Element::zero(s3)), std::domain_error);
    Eigen::MatrixXd neg = vec({2, 4, -1}).asDiagonal();
    CHECK_THROWS_AS(condition_number(sym_element(neg)), std::domain_error);
}

TEST_CASE("monotone_pairing_check") {
    Rng rng(37);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        const Element x = distinct_element(spec, rng);
        const Element v = spectral_subgradient(SpectralFunction{schatten(2), spec}, x);
        CHECK(monotone_pairing_check(x, v));
        CHECK(monotone_pairing_check(unit(spec), random_element(spec, rng)));
        CHECK_FALSE(monotone_pairing_check(x, -x));
    }
    CHECK_THROWS_AS(monotone_pairing_check(unit(AlgebraSpec::parse("sym:2")), unit(AlgebraSpec::parse("sym:3"))),
                    AlgebraMismatch);
}

TEST_CASE("strict convexity transfer") {
    Rng rng(38);
    for (const auto& spec : sample_algebras()) {
        const SpectralFunction F{sumsq(), spec};
        double margin = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 1000; ++t) {
            const Element x = random_element(spec, rng);
            const Element y = random_element(spec, rng);
            margin = std::min(margin, 0.5 * (F(x) + F(y)) - F(0.5 * (x + y)));
        }
        CHECK(margin > 0.0);
    }
}

TEST_CASE("strict norm transfer") {
    Rng rng(39);
    for (const auto& spec : sample_algebras()) {
        for (double p : {1.5, 2.0, 3.0}) {
            const SpectralFunction F{schatten(p), spec};
            double worst = 0.0;
            for (int t = 0; t < 1000; ++t) {
                Element x = random_element(spec, rng);
                Element y = random_element(spec, rng);
                x *= 1.0 / F(x);
                y *= 1.0 / F(y);
                worst = std::max(worst, F(x + y));
            }
            CHECK(worst < 2.0);
        }
        if (spec.rank() >= 2) {
            const auto frame = spectral_decompose(random_element(spec, rng)).frame;
            const SpectralFunction F1{schatten(1), spec};
            CHECK(F1(frame[0]) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(F1(frame[0] + frame[1]) - 2.0) <= 1e-12);
        }
    }
}

TEST_CASE("monotone pairing for strictly convex subgradients") {
    Rng rng(40);
    for (const auto& spec : sample_algebras()) {
        int violations = 0;
        for (int t = 0; t < 200; ++t) {
            const Element x = distinct_element(spec, rng);
            for (const auto& f : {sumsq(), schatten(1.5), schatten(3), sum_exp()}) {
                const Element v = spectral_subgradient(SpectralFunction{f, spec}, x);
                if (!monotone_pairing_check(x, v)) ++violations;
            }
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("transitivity of commutation through a refining element") {
    Rng rng(41);
    const auto spec = AlgebraSpec::parse("sym:4");
    const auto basis = lie::derivation_basis(spec);
    for (int t = 0; t < 20; ++t) {
        const auto frame = spectral_decompose(random_element(spec, rng)).frame;
        const Element a = assemble(frame, vec({2, 2, 0, 0}));
        const Element b = assemble(frame, vec({5, 3, 1, 1}));
        const auto stab = lie::stabilizer_derivations(basis, b);
        const auto x = lie::exp_derivation(lie::random_derivation(stab, rng, 1.0));
        Eigen::VectorXd gamma = random_normal(4, rng);
        Element c = Element::zero(spec);
        for (int i = 0; i < 4; ++i) c += gamma[i] * x(frame[std::size_t(i)]);
        CHECK(operator_commutes(b, c, 1e-8).commutes);
        CHECK(operator_commutes(a, c, 1e-8).commutes);
    }
}
