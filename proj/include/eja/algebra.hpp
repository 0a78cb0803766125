#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eja {

/// Raised when two operands live in different algebras.
class AlgebraMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class AlgebraKind { RealVector, SymMatrix, SpinFactor, DirectProduct };

/// Identifies a Euclidean Jordan algebra together with its fixed orthonormal
/// basis (trace-form inner product).
///
/// Coordinates of every kind are taken in an orthonormal basis:
///  - RealVector(n): the standard basis of R^n;
///  - SymMatrix(n): E_ii and (E_ij + E_ji)/sqrt(2), packed row-wise over the
///    upper triangle, so the coordinate of an off-diagonal entry X_ij is
///    sqrt(2) X_ij;
///  - SpinFactor(n): sqrt(2) times the usual spin coordinates (x0, xbar), so
///    that 2(x0 y0 + xbar.ybar) becomes the plain dot product;
///  - DirectProduct: concatenation of the factor coordinates.
class AlgebraSpec {
public:
    static AlgebraSpec real_vector(int n);
    static AlgebraSpec sym_matrix(int n);
    static AlgebraSpec spin_factor(int n);
    /// Nested products are flattened; at least two factors are required after
    /// flattening.
    static AlgebraSpec product(std::vector<AlgebraSpec> factors);

    /// Parses `rn:4`, `sym:3`, `spin:5`, `prod(sym:3,spin:4)`.
    static AlgebraSpec parse(std::string_view text);

    AlgebraKind kind() const noexcept { return kind_; }
    /// Order parameter n of a simple algebra (0 for products).
    int order() const noexcept { return order_; }
    int rank() const noexcept { return rank_; }
    int dim() const noexcept { return dim_; }
    const std::vector<AlgebraSpec>& factors() const noexcept { return *factors_; }

    /// Simple pieces in order: the factors of a product, or the algebra itself.
    std::vector<AlgebraSpec> simple_factors() const;
    /// Coordinate offset of each simple factor; size = simple_factors().size().
    std::vector<int> coord_offsets() const;

    std::string to_string() const;

    friend bool operator==(const AlgebraSpec& a, const AlgebraSpec& b);
    friend bool operator!=(const AlgebraSpec& a, const AlgebraSpec& b) { return !(a == b); }

private:
    AlgebraSpec(AlgebraKind kind, int order, int rank, int dim, std::vector<AlgebraSpec> factors);

    AlgebraKind kind_;
    int order_;
    int rank_;
    int dim_;
    // shared so that elements can carry their algebra cheaply
    std::shared_ptr<const std::vector<AlgebraSpec>> factors_;
};

inline void require_same(const AlgebraSpec& a, const AlgebraSpec& b, const char* what) {
    if (a != b)
        throw AlgebraMismatch(std::string(what) + ": algebra mismatch (" + a.to_string() + " vs " +
                              b.to_string() + ")");
}

}  // namespace eja
