#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "eja/linear_map.hpp"
#include "eja/random.hpp"
#include "test_support.hpp"

using namespace eja;
using eja::testing::sample_algebras;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

double scale_of(const Element& x) { return 1.0 + norm(x); }

}  // namespace

TEST_CASE("algebra spec parsing") {
    CHECK(AlgebraSpec::parse("rn:4").dim() == 4);
    CHECK(AlgebraSpec::parse("sym:3").dim() == 6);
    CHECK(AlgebraSpec::parse("sym:3").rank() == 3);
    CHECK(AlgebraSpec::parse("spin:5").rank() == 2);
    const auto p = AlgebraSpec::parse("prod(sym:3, spin:4)");
    CHECK(p.rank() == 5);
    CHECK(p.dim() == 10);
    CHECK(p.to_string() == "prod(sym:3,spin:4)");
    CHECK(AlgebraSpec::parse(p.to_string()) == p);

    const auto nested = AlgebraSpec::parse("prod(rn:1,prod(sym:2,spin:3))");
    CHECK(nested.factors().size() == 3);
    CHECK(nested.to_string() == "prod(rn:1,sym:2,spin:3)");

    CHECK_THROWS_AS(AlgebraSpec::parse("prod(sym:3)"), std::invalid_argument);
    CHECK_THROWS_AS(AlgebraSpec::parse("herm:3"), std::invalid_argument);
    CHECK_THROWS_AS(AlgebraSpec::parse("sym:0"), std::invalid_argument);
    CHECK_THROWS_AS(AlgebraSpec::parse("spin:1"), std::invalid_argument);
    CHECK_THROWS_AS(AlgebraSpec::parse("sym:3x"), std::invalid_argument);
}

TEST_CASE("element construction rejects bad coordinates") {
    const auto s = AlgebraSpec::parse("sym:2");
    CHECK_THROWS_AS(Element(s, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
    bad[1] = std::nan("");
    CHECK_THROWS_AS(Element(s, bad), std::invalid_argument);
}

TEST_CASE("jordan_product") {
    Rng rng(1);
    SUBCASE("unit law and commutativity") {
        for (const auto& spec : sample_algebras()) {
            const Element x = random_element(spec, rng);
            const Element y = random_element(spec, rng);
            CHECK(norm(jordan_product(x, unit(spec)) - x) <= 1e-14 * scale_of(x));
            CHECK(norm(jordan_product(x, y) - jordan_product(y, x)) <= 1e-14 * (1 + norm(x) * norm(y)));
        }
    }
    SUBCASE("sym:2 diag(1,0) o offdiag(1) = offdiag(1/2)") {
        const Element d = sym_element(mat2(1, 0, 0, 0));
        const Element o = sym_element(mat2(0, 1, 1, 0));
        const Eigen::MatrixXd got = to_matrix(jordan_product(d, o));
        CHECK((got - mat2(0, 0.5, 0.5, 0)).norm() <= 1e-15);
    }
    SUBCASE("sym matches (XY+YX)/2 computed on plain matrices") {
        for (int n : {2, 3, 5}) {
            Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, n);
            Eigen::MatrixXd Y = Eigen::MatrixXd::Random(n, n);
            X = (X + X.transpose()).eval();
            Y = (Y + Y.transpose()).eval();
            const Eigen::MatrixXd expected = 0.5 * (X * Y + Y * X);
            CHECK((to_matrix(jordan_product(sym_element(X), sym_element(Y))) - expected).norm() <= 1e-13);
        }
    }
    SUBCASE("spin:3 (1,(0,0)) o (3,(4,0)) = (3,(4,0))") {
        const Element e = spin_element(1.0, vec({0, 0}));
        const Element x = spin_element(3.0, vec({4, 0}));
        CHECK((spin_coords(jordan_product(e, x)) - vec({3, 4, 0})).norm() <= 1e-14);
        CHECK(norm(e - unit(AlgebraSpec::parse("spin:3"))) <= 1e-15);
    }
    SUBCASE("spin product formula in spin coordinates") {
        const Element x = spin_element(0.5, vec({1, -2, 3}));
        const Element y = spin_element(-1.5, vec({2, 0.5, 1}));
        const Eigen::VectorXd xs = vec({0.5, 1, -2, 3});
        const Eigen::VectorXd ys = vec({-1.5, 2, 0.5, 1});
        Eigen::VectorXd expected(4);
        expected[0] = xs.dot(ys);
        expected.tail(3) = xs[0] * ys.tail(3) + ys[0] * xs.tail(3);
        CHECK((spin_coords(jordan_product(x, y)) - expected).norm() <= 1e-14);
    }
    SUBCASE("rn is componentwise") {
        const auto s = AlgebraSpec::parse("rn:3");
        CHECK((jordan_product(Element(s, vec({1, 2, 3})), Element(s, vec({4, 5, 6}))).coords() -
               vec({4, 10, 18}))
                  .norm() == 0.0);
    }
    SUBCASE("products act factor-wise") {
        const auto s = AlgebraSpec::parse("prod(sym:2,spin:3)");
        const Element x = random_element(s, rng);
        const Element y = random_element(s, rng);
        const auto xp = split(x);
        const auto yp = split(y);
        const Element expected = join(s, std::vector<Element>{jordan_product(xp[0], yp[0]),
                                                               jordan_product(xp[1], yp[1])});
        CHECK(norm(jordan_product(x, y) - expected) <= 1e-15);
    }
    SUBCASE("algebra mismatch") {
        CHECK_THROWS_AS(jordan_product(unit(AlgebraSpec::parse("sym:2")), unit(AlgebraSpec::parse("rn:3"))),
                        AlgebraMismatch);
    }
}

TEST_CASE("inner") {
    Rng rng(2);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        const Element e = unit(spec);
        CHECK(inner(e, e) == doctest::Approx(spec.rank()).epsilon(1e-14));
        const Element x = random_element(spec, rng);
        CHECK(inner(x, x) == doctest::Approx(eigenvalue_map(x).squaredNorm()).epsilon(1e-12));
        const auto frame = spectral_decompose(x).frame;
        for (std::size_t i = 0; i < frame.size(); ++i)
            for (std::size_t j = 0; j < frame.size(); ++j)
                CHECK(std::abs(inner(frame[i], frame[j]) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
    SUBCASE("trace forms") {
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 4);
        Eigen::MatrixXd Y = Eigen::MatrixXd::Random(4, 4);
        X = (X + X.transpose()).eval();
        Y = (Y + Y.transpose()).eval();
        CHECK(inner(sym_element(X), sym_element(Y)) == doctest::Approx((X * Y).trace()).epsilon(1e-13));
        const Element a = spin_element(2.0, vec({1, -1}));
        const Element b = spin_element(-0.5, vec({3, 4}));
        CHECK(inner(a, b) == doctest::Approx(2 * (2.0 * -0.5 + 1 * 3 + -1 * 4)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(inner(unit(AlgebraSpec::parse("sym:2")), unit(AlgebraSpec::parse("spin:3"))),
                    AlgebraMismatch);
}

TEST_CASE("spectral_decompose") {
    SUBCASE("spin:3 (3,(4,0))") {
        const auto dec = spectral_decompose(spin_element(3.0, vec({4, 0})));
        CHECK(dec.eigenvalues[0] == doctest::Approx(7.0).epsilon(1e-15));
        CHECK(dec.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK((spin_coords(dec.frame[0]) - vec({0.5, 0.5, 0})).norm() <= 1e-15);
        CHECK((spin_coords(dec.frame[1]) - vec({0.5, -0.5, 0})).norm() <= 1e-15);
    }
    SUBCASE("spin at xbar = 0 uses the canonical frame") {
        const auto dec = spectral_decompose(spin_element(2.0, vec({0, 0, 0})));
        CHECK(dec.eigenvalues[0] == 2.0);
        CHECK(dec.eigenvalues[1] == 2.0);
        CHECK((spin_coords(dec.frame[0]) - vec({0.5, 0.5, 0, 0})).norm() <= 1e-15);
        CHECK(dec.multiplicity_blocks.size() == 1);
    }
    SUBCASE("unit") {
        for (const auto& spec : sample_algebras()) {
            const auto dec = spectral_decompose(unit(spec));
            CHECK((dec.eigenvalues - Eigen::VectorXd::Ones(spec.rank())).norm() <= 1e-14);
            CHECK(dec.frame.defect() <= 1e-13);
        }
    }
    SUBCASE("sym:2 diag(2,5)") {
        const auto dec = spectral_decompose(sym_element(mat2(2, 0, 0, 5)));
        CHECK(dec.eigenvalues[0] == 5.0);
        CHECK(dec.eigenvalues[1] == 2.0);
        CHECK((to_matrix(dec.frame[0]) - mat2(0, 0, 0, 1)).norm() <= 1e-15);
        CHECK((to_matrix(dec.frame[1]) - mat2(1, 0, 0, 0)).norm() <= 1e-15);
    }
    SUBCASE("frame validity and reconstruction on random elements") {
        Rng rng(3);
        for (const auto& spec : sample_algebras())
            for (int t = 0; t < 50; ++t) {
                const Element x = random_element(spec, rng, 3.0);
                const auto dec = spectral_decompose(x);
                CHECK(dec.eigenvalues.size() == spec.rank());
                for (Eigen::Index i = 1; i < dec.eigenvalues.size(); ++i)
                    CHECK(dec.eigenvalues[i - 1] >= dec.eigenvalues[i]);
                CHECK(dec.frame.defect() <= 1e-12);
                CHECK(norm(dec.reconstruct() - x) <= 1e-10 * (1 + norm(x)));
            }
    }
    SUBCASE("sym eigenvalues agree with an independent LAPACK-style solver") {
        Rng rng(4);
        for (int t = 0; t < 20; ++t) {
            const Element x = random_element(AlgebraSpec::parse("sym:5"), rng);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_matrix(x));
            Eigen::VectorXd expected = ref.eigenvalues().reverse();
            CHECK((eigenvalue_map(x) - expected).norm() <= 1e-12);
        }
    }
    SUBCASE("repeated eigenvalues form multiplicity blocks") {
        Eigen::MatrixXd q = Eigen::MatrixXd::Random(4, 4).householderQr().householderQ();
        Eigen::VectorXd d = vec({3, 1, 3, 1});
        const Element x = sym_element(Eigen::MatrixXd(q * d.asDiagonal() * q.transpose()));
        const auto dec = spectral_decompose(x);
        REQUIRE(dec.multiplicity_blocks.size() == 2);
        CHECK(dec.multiplicity_blocks[0] == std::vector<int>{0, 1});
        CHECK(dec.multiplicity_blocks[1] == std::vector<int>{2, 3});
        CHECK(norm(dec.reconstruct() - x) <= 1e-12);
    }
    SUBCASE("zero element") {
        const auto dec = spectral_decompose(Element::zero(AlgebraSpec::parse("sym:3")));
        CHECK(dec.eigenvalues.norm() == 0.0);
        CHECK(dec.frame.defect() <= 1e-14);
    }
}

TEST_CASE("eigenvalue_map") {
    Rng rng(5);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        CHECK((eigenvalue_map(unit(spec)) - Eigen::VectorXd::Ones(spec.rank())).norm() <= 1e-14);
        const Element x = random_element(spec, rng);
        const Eigen::VectorXd l = eigenvalue_map(x);
        CHECK((eigenvalue_map(-x) + l.reverse()).norm() <= 1e-12 * (1 + l.norm()));
        CHECK((l - spectral_decompose(x).eigenvalues).norm() == 0.0);
        int violations = 0;
        for (int t = 0; t < 100; ++t) {
            const Element a = random_element(spec, rng);
            const Element b = a + random_element(spec, rng, t % 2 ? 1.0 : 1e-3);
            if ((eigenvalue_map(a) - eigenvalue_map(b)).norm() > norm(a - b) + 1e-9) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("lyapunov_map") {
    Rng rng(6);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        CHECK((lyapunov_map(unit(spec)).matrix() - Eigen::MatrixXd::Identity(spec.dim(), spec.dim())).norm() <=
              1e-14);
        CHECK(lyapunov_map(Element::zero(spec)).matrix().norm() == 0.0);
        const Element a = random_element(spec, rng);
        const LinearMap la = lyapunov_map(a);
        CHECK((la.matrix() - la.matrix().transpose()).norm() <= 1e-14 * (1 + norm(a)));
        const Element x = random_element(spec, rng);
        CHECK(norm(la(x) - jordan_product(a, x)) <= 1e-13 * (1 + norm(a) * norm(x)));
    }
}

TEST_CASE("operator_commutes") {
    Rng rng(7);
    for (const auto& spec : sample_algebras()) {
        const Element a = random_element(spec, rng);
        const auto with_unit = operator_commutes(a, unit(spec), 1e-10);
        CHECK(with_unit.commutes);
        CHECK(with_unit.residual <= 1e-14);
        CHECK(operator_commutes(a, a, 1e-10).commutes);
        const auto pair = eja::testing::shared_frame_pair(spec, rng);
        CHECK(operator_commutes(pair.a, pair.b, 1e-10).commutes);
    }
    const auto bad = operator_commutes(sym_element(mat2(1, 0, 0, 0)), sym_element(mat2(0, 1, 1, 0)), 1e-8);
    CHECK_FALSE(bad.commutes);
    // Hand assembly: L_d = diag(1, 1/2, 0), L_o has 1/sqrt(2) at (0,1),(1,0),(1,2),(2,1);
    // the commutator has entries ±1/(2 sqrt(2)) at (0,1),(1,0),(1,2),(2,1), norm 1/sqrt(2).
    CHECK(bad.residual == doctest::Approx(std::sqrt(0.5) / (1 + std::sqrt(2.0))).epsilon(1e-14));
    CHECK_THROWS_AS(operator_commutes(unit(AlgebraSpec::parse("sym:2")), unit(AlgebraSpec::parse("sym:3")), 1e-8),
                    AlgebraMismatch);
}

TEST_CASE("strong_operator_commutes") {
    Rng rng(8);
    for (const auto& spec : sample_algebras()) {
        const Element a = random_element(spec, rng);
        CHECK(strong_operator_commutes(a, a, 1e-10).commutes);
    }
    const auto v = strong_operator_commutes(sym_element(mat2(1, 0, 0, 0)), sym_element(mat2(0, 0, 0, 1)), 1e-10);
    CHECK_FALSE(v.commutes);
    CHECK(v.residual == doctest::Approx(1.0));
    CHECK(operator_commutes(sym_element(mat2(1, 0, 0, 0)), sym_element(mat2(0, 0, 0, 1)), 1e-10).commutes);

    SUBCASE("equivalent to additivity of the eigenvalue map") {
        for (const auto& spec : sample_algebras()) {
            CAPTURE(spec.to_string());
            for (int t = 0; t < 20; ++t) {
                const auto frame = spectral_decompose(random_element(spec, rng)).frame;
                Eigen::VectorXd alpha = random_normal(spec.rank(), rng);
                Eigen::VectorXd beta = random_normal(spec.rank(), rng);
                std::sort(alpha.data(), alpha.data() + alpha.size(), std::greater<>());
                std::sort(beta.data(), beta.data() + beta.size(), std::greater<>());
                if (t % 2) beta.reverseInPlace();  // same frame, misaligned order
                const Element a = assemble(frame, alpha);
                const Element b = assemble(frame, beta);
                const bool strong = strong_operator_commutes(a, b, 1e-10).commutes;
                const bool additive =
                    (eigenvalue_map(a + b) - eigenvalue_map(a) - eigenvalue_map(b)).norm() <= 1e-9;
                CHECK(strong == additive);
                if (t % 2 == 0) CHECK(strong);
                CHECK(strong_operator_commutes(a, b, 1e-10).residual >= -1e-10);
            }
        }
    }
}

TEST_CASE("tensor_map") {
    Rng rng(9);
    for (const auto& spec : sample_algebras()) {
        const Element u = random_element(spec, rng);
        Element v = random_element(spec, rng);
        v *= 1.0 / norm(v);
        CHECK(norm(tensor_map(u, v)(v) - u) <= 1e-14 * (1 + norm(u)));
        CHECK(tensor_map(u, Element::zero(spec)).matrix().norm() == 0.0);
        // ⟨Xa, x⟩ = ⟨X, x ⊗ a⟩
        const LinearMap X(spec, Eigen::MatrixXd::Random(spec.dim(), spec.dim()));
        const Element a = random_element(spec, rng);
        const Element x = random_element(spec, rng);
        CHECK(std::abs(inner(X(a), x) - frobenius(X, tensor_map(x, a))) <= 1e-12);
    }
}

TEST_CASE("algebra identities over random trials") {
    Rng rng(10);
    for (const auto& spec : sample_algebras()) {
        CAPTURE(spec.to_string());
        double worst_jordan = 0, worst_assoc = 0, worst_lyap = 0;
        for (int t = 0; t < 200; ++t) {
            const Element x = random_element(spec, rng);
            const Element y = random_element(spec, rng);
            const Element z = random_element(spec, rng);
            const Element xx = jordan_product(x, x);
            const double j = norm(jordan_product(x, jordan_product(xx, y)) - jordan_product(xx, jordan_product(x, y)));
            worst_jordan = std::max(worst_jordan, j / std::max(1.0, std::pow(norm(x), 3) * norm(y)));
            const double s = std::abs(inner(jordan_product(x, y), z) - inner(y, jordan_product(x, z)));
            worst_assoc = std::max(worst_assoc, s / std::max(1.0, norm(x) * norm(y) * norm(z)));
            const Element w = random_element(spec, rng);
            const Eigen::MatrixXd luv = lyapunov_map(y).matrix() * lyapunov_map(z).matrix();
            const Eigen::MatrixXd lab = lyapunov_map(x).matrix() * lyapunov_map(w).matrix();
            const double lhs = x.coords().dot((luv - luv.transpose()) * w.coords());
            const double rhs = y.coords().dot((lab - lab.transpose()) * z.coords());
            worst_lyap = std::max(worst_lyap,
                                  std::abs(lhs - rhs) / std::max(1.0, norm(x) * norm(y) * norm(z) * norm(w)));
        }
        CHECK(worst_jordan <= 1e-10);
        CHECK(worst_assoc <= 1e-10);
        CHECK(worst_lyap <= 1e-10);
    }
}

TEST_CASE("extended precision instantiation") {
    using LElement = BasicElement<long double>;
    const auto spec = AlgebraSpec::parse("sym:3");
    Rng rng(11);
    const LElement x = random_element(spec, rng).cast<long double>();
    const auto dec = spectral_decompose(x);
    CHECK(static_cast<double>(norm(dec.reconstruct() - x)) <= 1e-16);
    CHECK(static_cast<double>(dec.frame.defect()) <= 1e-16);
    CHECK(operator_commutes(x, jordan_product(x, x), 1e-15L).commutes);
}
