#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eja/algebra.hpp"

namespace eja {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// An algebra element: coordinates in the algebra's orthonormal basis.
template <class Scalar>
class BasicElement {
public:
    using Vector = VectorX<Scalar>;

    BasicElement(AlgebraSpec algebra, Vector coords)
        : algebra_(std::move(algebra)), coords_(std::move(coords)) {
        if (coords_.size() != algebra_.dim())
            throw std::invalid_argument("element: expected " + std::to_string(algebra_.dim()) +
                                        " coordinates for " + algebra_.to_string());
        if (!coords_.allFinite()) throw std::invalid_argument("element: non-finite coordinates");
    }

    static BasicElement zero(const AlgebraSpec& algebra) {
        return BasicElement(algebra, Vector::Zero(algebra.dim()));
    }

    const AlgebraSpec& algebra() const noexcept { return algebra_; }
    const Vector& coords() const noexcept { return coords_; }
    Scalar operator[](Eigen::Index i) const { return coords_[i]; }
    int dim() const noexcept { return algebra_.dim(); }

    BasicElement& operator+=(const BasicElement& o) {
        require_same(algebra_, o.algebra_, "operator+=");
        coords_ += o.coords_;
        return *this;
    }
    BasicElement& operator-=(const BasicElement& o) {
        require_same(algebra_, o.algebra_, "operator-=");
        coords_ -= o.coords_;
        return *this;
    }
    BasicElement& operator*=(Scalar s) {
        coords_ *= s;
        return *this;
    }

    friend BasicElement operator+(BasicElement a, const BasicElement& b) { return a += b; }
    friend BasicElement operator-(BasicElement a, const BasicElement& b) { return a -= b; }
    friend BasicElement operator*(Scalar s, BasicElement a) { return a *= s; }
    friend BasicElement operator*(BasicElement a, Scalar s) { return a *= s; }
    friend BasicElement operator-(BasicElement a) { return a *= Scalar(-1); }

    template <class NewScalar>
    BasicElement<NewScalar> cast() const {
        return BasicElement<NewScalar>(algebra_, coords_.template cast<NewScalar>());
    }

private:
    AlgebraSpec algebra_;
    Vector coords_;
};

using Element = BasicElement<double>;

namespace detail {

template <class Scalar>
Scalar sqrt2() {
    using std::sqrt;
    return sqrt(Scalar(2));
}

/// Packed orthonormal coordinates of a symmetric matrix.
template <class Scalar, class Seg>
void pack_sym(const MatrixX<Scalar>& m, Seg&& out) {
    const Eigen::Index n = m.rows();
    const Scalar r2 = sqrt2<Scalar>();
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) out[k++] = (i == j) ? m(i, i) : r2 * m(i, j);
}

template <class Scalar, class Seg>
MatrixX<Scalar> unpack_sym(Eigen::Index n, const Seg& in) {
    MatrixX<Scalar> m(n, n);
    const Scalar inv_r2 = Scalar(1) / sqrt2<Scalar>();
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const Scalar v = in[k++];
            if (i == j)
                m(i, i) = v;
            else
                m(i, j) = m(j, i) = inv_r2 * v;
        }
    return m;
}

template <class Scalar, class SegX, class SegY, class SegOut>
void simple_product(const AlgebraSpec& f, const SegX& x, const SegY& y, SegOut&& out) {
    switch (f.kind()) {
        case AlgebraKind::RealVector: out = x.cwiseProduct(y); break;
        case AlgebraKind::SymMatrix: {
            const auto X = unpack_sym<Scalar>(f.order(), x);
            const auto Y = unpack_sym<Scalar>(f.order(), y);
            const MatrixX<Scalar> XY = X * Y;
            const MatrixX<Scalar> Z = Scalar(0.5) * (XY + XY.transpose());
            pack_sym<Scalar>(Z, out);
            break;
        }
        case AlgebraKind::SpinFactor: {
            // (x0 y0 + xbar.ybar, x0 ybar + y0 xbar) in spin coordinates,
            // rescaled to orthonormal coordinates.
            const Scalar s = Scalar(1) / sqrt2<Scalar>();
            const Eigen::Index m = f.dim() - 1;
            const Scalar head = x[0] * y[0] + x.tail(m).dot(y.tail(m));
            VectorX<Scalar> tail = x[0] * y.tail(m) + y[0] * x.tail(m);
            out[0] = s * head;
            out.tail(m) = s * tail;
            break;
        }
        case AlgebraKind::DirectProduct: throw std::logic_error("simple_product on product");
    }
}

}  // namespace detail

/// Jordan product x ∘ y.
template <class Scalar>
BasicElement<Scalar> jordan_product(const BasicElement<Scalar>& x, const BasicElement<Scalar>& y) {
    require_same(x.algebra(), y.algebra(), "jordan_product");
    const AlgebraSpec& spec = x.algebra();
    VectorX<Scalar> out(spec.dim());
    const auto factors = spec.simple_factors();
    const auto offsets = spec.coord_offsets();
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const int off = offsets[k];
        const int d = factors[k].dim();
        detail::simple_product<Scalar>(factors[k], x.coords().segment(off, d),
                                       y.coords().segment(off, d), out.segment(off, d));
    }
    return BasicElement<Scalar>(spec, std::move(out));
}

/// Trace-form inner product; the plain dot product of orthonormal coordinates.
template <class Scalar>
Scalar inner(const BasicElement<Scalar>& x, const BasicElement<Scalar>& y) {
    require_same(x.algebra(), y.algebra(), "inner");
    return x.coords().dot(y.coords());
}

template <class Scalar>
Scalar norm(const BasicElement<Scalar>& x) {
    return x.coords().norm();
}

/// Unit element e.
template <class Scalar = double>
BasicElement<Scalar> unit(const AlgebraSpec& spec) {
    VectorX<Scalar> c = VectorX<Scalar>::Zero(spec.dim());
    const auto factors = spec.simple_factors();
    const auto offsets = spec.coord_offsets();
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const auto& f = factors[k];
        const int off = offsets[k];
        switch (f.kind()) {
            case AlgebraKind::RealVector: c.segment(off, f.dim()).setOnes(); break;
            case AlgebraKind::SymMatrix: {
                int idx = off;
                for (int i = 0; i < f.order(); ++i) {
                    c[idx] = Scalar(1);
                    idx += f.order() - i;
                }
                break;
            }
            case AlgebraKind::SpinFactor: c[off] = detail::sqrt2<Scalar>(); break;
            case AlgebraKind::DirectProduct: break;
        }
    }
    return BasicElement<Scalar>(spec, std::move(c));
}

/// Builds a SymMatrix element from a symmetric matrix.
template <class Scalar>
BasicElement<Scalar> sym_element(const MatrixX<Scalar>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("sym_element: matrix must be square");
    const AlgebraSpec spec = AlgebraSpec::sym_matrix(static_cast<int>(m.rows()));
    VectorX<Scalar> c(spec.dim());
    const MatrixX<Scalar> s = Scalar(0.5) * (m + m.transpose());
    detail::pack_sym<Scalar>(s, c);
    return BasicElement<Scalar>(spec, std::move(c));
}

inline Element sym_element(const Eigen::MatrixXd& m) { return sym_element<double>(m); }

/// The symmetric matrix represented by a SymMatrix element.
template <class Scalar>
MatrixX<Scalar> to_matrix(const BasicElement<Scalar>& x) {
    if (x.algebra().kind() != AlgebraKind::SymMatrix)
        throw std::invalid_argument("to_matrix: not a SymMatrix element");
    return detail::unpack_sym<Scalar>(x.algebra().order(), x.coords());
}

/// Builds a SpinFactor element from spin coordinates (x0, xbar).
template <class Scalar>
BasicElement<Scalar> spin_element(Scalar x0, const VectorX<Scalar>& xbar) {
    const AlgebraSpec spec = AlgebraSpec::spin_factor(static_cast<int>(xbar.size()) + 1);
    VectorX<Scalar> c(spec.dim());
    c[0] = x0;
    c.tail(xbar.size()) = xbar;
    c *= detail::sqrt2<Scalar>();
    return BasicElement<Scalar>(spec, std::move(c));
}

inline Element spin_element(double x0, const Eigen::VectorXd& xbar) {
    return spin_element<double>(x0, xbar);
}

/// Spin coordinates (x0, xbar) of a SpinFactor element, stacked.
template <class Scalar>
VectorX<Scalar> spin_coords(const BasicElement<Scalar>& x) {
    if (x.algebra().kind() != AlgebraKind::SpinFactor)
        throw std::invalid_argument("spin_coords: not a SpinFactor element");
    return x.coords() / detail::sqrt2<Scalar>();
}

/// Factor components of an element (a single component for simple algebras).
template <class Scalar>
std::vector<BasicElement<Scalar>> split(const BasicElement<Scalar>& x) {
    std::vector<BasicElement<Scalar>> parts;
    const auto factors = x.algebra().simple_factors();
    const auto offsets = x.algebra().coord_offsets();
    for (std::size_t k = 0; k < factors.size(); ++k)
        parts.emplace_back(factors[k], x.coords().segment(offsets[k], factors[k].dim()));
    return parts;
}

/// Inverse of split.
template <class Scalar>
BasicElement<Scalar> join(const AlgebraSpec& spec, const std::vector<BasicElement<Scalar>>& parts) {
    const auto factors = spec.simple_factors();
    if (parts.size() != factors.size()) throw std::invalid_argument("join: factor count mismatch");
    VectorX<Scalar> c(spec.dim());
    const auto offsets = spec.coord_offsets();
    for (std::size_t k = 0; k < factors.size(); ++k) {
        require_same(parts[k].algebra(), factors[k], "join");
        c.segment(offsets[k], factors[k].dim()) = parts[k].coords();
    }
    return BasicElement<Scalar>(spec, std::move(c));
}

}  // namespace eja
