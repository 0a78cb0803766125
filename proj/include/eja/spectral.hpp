#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eja/element.hpp"

namespace eja {

/// Eigen-pairs of a real symmetric matrix from cyclic Jacobi rotations,
/// sorted by nonincreasing eigenvalue (columns of `vectors`).
template <class Scalar>
struct SymmetricEigen {
    VectorX<Scalar> values;
    MatrixX<Scalar> vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi. Stops once the off-diagonal Frobenius mass is at most
/// rel_tol * ||A||_F.
template <class Scalar>
SymmetricEigen<Scalar> jacobi_eigen(MatrixX<Scalar> a, Scalar rel_tol = Scalar(1e-13),
                                    int max_sweeps = 100) {
    using std::abs;
    using std::sqrt;
    const Eigen::Index n = a.rows();
    MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
    const Scalar threshold = rel_tol * a.norm();
    auto off_mass = [&] {
        Scalar s(0);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return sqrt(Scalar(2) * s);
    };
    int sweep = 0;
    for (; sweep < max_sweeps && off_mass() > threshold; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (apq == Scalar(0)) continue;
                // Rutishauser's stable rotation angle.
                const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                const Scalar sign = theta >= Scalar(0) ? Scalar(1) : Scalar(-1);
                const Scalar t = sign / (abs(theta) + sqrt(theta * theta + Scalar(1)));
                const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
                const Scalar s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar akp = a(k, p);
                    const Scalar akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar apk = a(p, k);
                    const Scalar aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = Scalar(0);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar vkp = v(k, p);
                    const Scalar vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    SymmetricEigen<Scalar> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    out.sweeps = sweep;
    return out;
}

/// A complete system of orthogonal primitive idempotents.
template <class Scalar>
struct BasicJordanFrame {
    std::vector<BasicElement<Scalar>> idempotents;

    std::size_t size() const noexcept { return idempotents.size(); }
    const BasicElement<Scalar>& operator[](std::size_t i) const { return idempotents[i]; }

    /// Largest of max ||e_i∘e_j - δ_ij e_i|| and ||Σ e_i - e||.
    Scalar defect() const {
        if (idempotents.empty()) return Scalar(0);
        const AlgebraSpec& spec = idempotents.front().algebra();
        Scalar worst(0);
        auto sum = BasicElement<Scalar>::zero(spec);
        for (std::size_t i = 0; i < size(); ++i) {
            sum += idempotents[i];
            for (std::size_t j = i; j < size(); ++j) {
                auto p = jordan_product(idempotents[i], idempotents[j]);
                if (i == j) p -= idempotents[i];
                worst = std::max(worst, norm(p));
            }
        }
        return std::max(worst, norm(sum - unit<Scalar>(spec)));
    }
};

using JordanFrame = BasicJordanFrame<double>;

template <class Scalar>
inline Scalar default_tie_tolerance(Scalar lambda_max_abs) {
    return Scalar(1e-8) * (Scalar(1) + lambda_max_abs);
}

/// Groups consecutive sorted (nonincreasing) values whose gap is at most tol.
template <class Scalar>
std::vector<std::vector<int>> multiplicity_blocks(const VectorX<Scalar>& sorted, Scalar tol) {
    std::vector<std::vector<int>> blocks;
    for (Eigen::Index i = 0; i < sorted.size(); ++i) {
        if (blocks.empty() || sorted[i - 1] - sorted[i] > tol)
            blocks.push_back({static_cast<int>(i)});
        else
            blocks.back().push_back(static_cast<int>(i));
    }
    return blocks;
}

/// x = Σ λ_i e_i with nonincreasing λ.
template <class Scalar>
struct BasicSpectralDecomposition {
    VectorX<Scalar> eigenvalues;
    BasicJordanFrame<Scalar> frame;
    std::vector<std::vector<int>> multiplicity_blocks;
    /// Simple factor that owns each frame idempotent.
    std::vector<int> factor_of;

    BasicElement<Scalar> reconstruct() const {
        auto x = BasicElement<Scalar>::zero(frame[0].algebra());
        for (std::size_t i = 0; i < frame.size(); ++i) x += eigenvalues[Eigen::Index(i)] * frame[i];
        return x;
    }
};

using SpectralDecomposition = BasicSpectralDecomposition<double>;

namespace detail {

template <class Scalar>
struct FactorPair {
    Scalar value;
    VectorX<Scalar> idempotent;  // coordinates within the factor
};

template <class Scalar>
std::vector<FactorPair<Scalar>> decompose_simple(const AlgebraSpec& f, const VectorX<Scalar>& x) {
    using std::sqrt;
    std::vector<FactorPair<Scalar>> pairs;
    switch (f.kind()) {
        case AlgebraKind::RealVector:
            for (int i = 0; i < f.dim(); ++i) {
                VectorX<Scalar> e = VectorX<Scalar>::Zero(f.dim());
                e[i] = Scalar(1);
                pairs.push_back({x[i], std::move(e)});
            }
            break;
        case AlgebraKind::SymMatrix: {
            const auto eig = jacobi_eigen<Scalar>(unpack_sym<Scalar>(f.order(), x));
            for (int i = 0; i < f.order(); ++i) {
                const VectorX<Scalar> q = eig.vectors.col(i);
                VectorX<Scalar> e(f.dim());
                pack_sym<Scalar>(MatrixX<Scalar>(q * q.transpose()), e);
                pairs.push_back({eig.values[i], std::move(e)});
            }
            break;
        }
        case AlgebraKind::SpinFactor: {
            const Scalar s = Scalar(1) / sqrt2<Scalar>();
            const Eigen::Index m = f.dim() - 1;
            const Scalar x0 = s * x[0];
            VectorX<Scalar> xbar = s * x.tail(m);
            const Scalar r = xbar.norm();
            VectorX<Scalar> w = VectorX<Scalar>::Zero(m);
            if (r > Scalar(0))
                w = xbar / r;
            else
                w[0] = Scalar(1);
            // e± = (1/2)(1, ±w) in spin coordinates
            VectorX<Scalar> ep(f.dim()), em(f.dim());
            ep[0] = em[0] = s;
            ep.tail(m) = s * w;
            em.tail(m) = -s * w;
            pairs.push_back({x0 + r, std::move(ep)});
            pairs.push_back({x0 - r, std::move(em)});
            break;
        }
        case AlgebraKind::DirectProduct: throw std::logic_error("decompose_simple on product");
    }
    return pairs;
}

}  // namespace detail

/// Spectral decomposition; total on finite input. Ties are kept in a stable
/// order and grouped into multiplicity blocks.
template <class Scalar>
BasicSpectralDecomposition<Scalar> spectral_decompose(const BasicElement<Scalar>& x) {
    using std::abs;
    const AlgebraSpec& spec = x.algebra();
    const auto factors = spec.simple_factors();
    const auto offsets = spec.coord_offsets();

    struct Entry {
        Scalar value;
        int factor;
        VectorX<Scalar> coords;
    };
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const int off = offsets[k];
        const int d = factors[k].dim();
        for (auto& p : detail::decompose_simple<Scalar>(factors[k], x.coords().segment(off, d))) {
            VectorX<Scalar> full = VectorX<Scalar>::Zero(spec.dim());
            full.segment(off, d) = p.idempotent;
            entries.push_back({p.value, static_cast<int>(k), std::move(full)});
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value > b.value; });

    BasicSpectralDecomposition<Scalar> out;
    out.eigenvalues.resize(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out.eigenvalues[Eigen::Index(i)] = entries[i].value;
        out.factor_of.push_back(entries[i].factor);
        out.frame.idempotents.emplace_back(spec, std::move(entries[i].coords));
    }
    const Scalar top = out.eigenvalues.size() ? out.eigenvalues.cwiseAbs().maxCoeff() : Scalar(0);
    out.multiplicity_blocks = multiplicity_blocks<Scalar>(out.eigenvalues, default_tie_tolerance(top));
    return out;
}

/// λ(x): eigenvalues in nonincreasing order.
template <class Scalar>
VectorX<Scalar> eigenvalue_map(const BasicElement<Scalar>& x) {
    const AlgebraSpec& spec = x.algebra();
    const auto factors = spec.simple_factors();
    const auto offsets = spec.coord_offsets();
    std::vector<Scalar> values;
    values.reserve(static_cast<std::size_t>(spec.rank()));
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const auto& f = factors[k];
        const VectorX<Scalar> seg = x.coords().segment(offsets[k], f.dim());
        if (f.kind() == AlgebraKind::SymMatrix) {
            const auto eig = jacobi_eigen<Scalar>(detail::unpack_sym<Scalar>(f.order(), seg));
            for (Eigen::Index i = 0; i < eig.values.size(); ++i) values.push_back(eig.values[i]);
        } else {
            for (const auto& p : detail::decompose_simple<Scalar>(f, seg)) values.push_back(p.value);
        }
    }
    std::sort(values.begin(), values.end(), std::greater<Scalar>());
    return Eigen::Map<const VectorX<Scalar>>(values.data(), Eigen::Index(values.size()));
}

/// Σ u_i e_i over a given frame.
template <class Scalar>
BasicElement<Scalar> assemble(const BasicJordanFrame<Scalar>& frame, const VectorX<Scalar>& values) {
    if (values.size() != Eigen::Index(frame.size()))
        throw std::invalid_argument("assemble: value count must equal frame size");
    auto x = BasicElement<Scalar>::zero(frame[0].algebra());
    for (std::size_t i = 0; i < frame.size(); ++i) x += values[Eigen::Index(i)] * frame[i];
    return x;
}

}  // namespace eja
