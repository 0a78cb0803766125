#pragma once

#include <utility>

#include "eja/spectral.hpp"

namespace eja {

/// A linear operator on the algebra, as a dim×dim matrix in the orthonormal
/// basis. The Frobenius inner product of two maps is then the entrywise dot.
template <class Scalar>
class BasicLinearMap {
public:
    using Matrix = MatrixX<Scalar>;

    BasicLinearMap(AlgebraSpec algebra, Matrix matrix)
        : algebra_(std::move(algebra)), matrix_(std::move(matrix)) {
        if (matrix_.rows() != algebra_.dim() || matrix_.cols() != algebra_.dim())
            throw std::invalid_argument("linear map: matrix must be dim x dim");
        if (!matrix_.allFinite()) throw std::invalid_argument("linear map: non-finite entries");
    }

    static BasicLinearMap zero(const AlgebraSpec& a) {
        return BasicLinearMap(a, Matrix::Zero(a.dim(), a.dim()));
    }
    static BasicLinearMap identity(const AlgebraSpec& a) {
        return BasicLinearMap(a, Matrix::Identity(a.dim(), a.dim()));
    }

    const AlgebraSpec& algebra() const noexcept { return algebra_; }
    const Matrix& matrix() const noexcept { return matrix_; }

    BasicElement<Scalar> operator()(const BasicElement<Scalar>& x) const {
        require_same(algebra_, x.algebra(), "linear map apply");
        return BasicElement<Scalar>(algebra_, matrix_ * x.coords());
    }

    BasicLinearMap transpose() const { return BasicLinearMap(algebra_, matrix_.transpose()); }

    friend BasicLinearMap operator*(const BasicLinearMap& a, const BasicLinearMap& b) {
        require_same(a.algebra_, b.algebra_, "linear map compose");
        return BasicLinearMap(a.algebra_, a.matrix_ * b.matrix_);
    }
    friend BasicLinearMap operator+(const BasicLinearMap& a, const BasicLinearMap& b) {
        require_same(a.algebra_, b.algebra_, "linear map add");
        return BasicLinearMap(a.algebra_, a.matrix_ + b.matrix_);
    }
    friend BasicLinearMap operator-(const BasicLinearMap& a, const BasicLinearMap& b) {
        require_same(a.algebra_, b.algebra_, "linear map subtract");
        return BasicLinearMap(a.algebra_, a.matrix_ - b.matrix_);
    }
    friend BasicLinearMap operator*(Scalar s, const BasicLinearMap& a) {
        return BasicLinearMap(a.algebra_, s * a.matrix_);
    }

private:
    AlgebraSpec algebra_;
    Matrix matrix_;
};

using LinearMap = BasicLinearMap<double>;

/// ⟨X, Y⟩ = Σ ⟨c_i, X c_j⟩⟨c_i, Y c_j⟩.
template <class Scalar>
Scalar frobenius(const BasicLinearMap<Scalar>& x, const BasicLinearMap<Scalar>& y) {
    require_same(x.algebra(), y.algebra(), "frobenius");
    return x.matrix().cwiseProduct(y.matrix()).sum();
}

template <class Scalar>
Scalar frobenius_norm(const BasicLinearMap<Scalar>& x) {
    return x.matrix().norm();
}

/// L_a: x ↦ a ∘ x. Column j holds the coordinates of a ∘ c_j.
template <class Scalar>
BasicLinearMap<Scalar> lyapunov_map(const BasicElement<Scalar>& a) {
    const AlgebraSpec& spec = a.algebra();
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(spec.dim(), spec.dim());
    const auto factors = spec.simple_factors();
    const auto offsets = spec.coord_offsets();
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const auto& f = factors[k];
        const int off = offsets[k];
        const int d = f.dim();
        const VectorX<Scalar> seg = a.coords().segment(off, d);
        auto block = m.block(off, off, d, d);
        switch (f.kind()) {
            case AlgebraKind::RealVector: block.diagonal() = seg; break;
            case AlgebraKind::SpinFactor: {
                const Scalar s = Scalar(1) / detail::sqrt2<Scalar>();
                block.diagonal().setConstant(s * seg[0]);
                block.row(0).tail(d - 1) = s * seg.tail(d - 1).transpose();
                block.col(0).tail(d - 1) = s * seg.tail(d - 1);
                break;
            }
            case AlgebraKind::SymMatrix: {
                VectorX<Scalar> basis = VectorX<Scalar>::Zero(d);
                VectorX<Scalar> col(d);
                for (int j = 0; j < d; ++j) {
                    basis.setZero();
                    basis[j] = Scalar(1);
                    detail::simple_product<Scalar>(f, seg, basis, col);
                    block.col(j) = col;
                }
                break;
            }
            case AlgebraKind::DirectProduct: break;
        }
    }
    return BasicLinearMap<Scalar>(spec, std::move(m));
}

/// (u ⊗ v) x = ⟨v, x⟩ u.
template <class Scalar>
BasicLinearMap<Scalar> tensor_map(const BasicElement<Scalar>& u, const BasicElement<Scalar>& v) {
    require_same(u.algebra(), v.algebra(), "tensor_map");
    return BasicLinearMap<Scalar>(u.algebra(), u.coords() * v.coords().transpose());
}

template <class Scalar>
struct CommuteVerdict {
    bool commutes;
    Scalar residual;
};

/// Residual ||L_a L_b - L_b L_a||_F / (1 + ||a|| ||b||); commutes iff ≤ tol.
template <class Scalar>
CommuteVerdict<Scalar> operator_commutes(const BasicElement<Scalar>& a, const BasicElement<Scalar>& b,
                                         Scalar tol) {
    require_same(a.algebra(), b.algebra(), "operator_commutes");
    const auto la = lyapunov_map(a).matrix();
    const auto lb = lyapunov_map(b).matrix();
    const MatrixX<Scalar> ab = la * lb;
    const Scalar r = (ab - ab.transpose()).norm() / (Scalar(1) + norm(a) * norm(b));
    return {r <= tol, r};
}

/// gap = ⟨λ(a), λ(b)⟩ - ⟨a, b⟩ (nonnegative up to rounding); strongly
/// commutes iff |gap| ≤ tol (1 + ||a|| ||b||).
template <class Scalar>
CommuteVerdict<Scalar> strong_operator_commutes(const BasicElement<Scalar>& a,
                                                const BasicElement<Scalar>& b, Scalar tol) {
    using std::abs;
    require_same(a.algebra(), b.algebra(), "strong_operator_commutes");
    const Scalar gap = eigenvalue_map(a).dot(eigenvalue_map(b)) - inner(a, b);
    return {abs(gap) <= tol * (Scalar(1) + norm(a) * norm(b)), gap};
}

}  // namespace eja
