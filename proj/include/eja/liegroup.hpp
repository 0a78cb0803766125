#pragma once

#include <vector>

#include "eja/linear_map.hpp"
#include "eja/random.hpp"

namespace eja::lie {

/// Frobenius-orthonormal basis of Der(V).
struct DerivationBasis {
    AlgebraSpec algebra;
    std::vector<LinearMap> maps;

    int dimension() const noexcept { return static_cast<int>(maps.size()); }
    /// Σ coeffs_k D_k.
    LinearMap combine(const Eigen::VectorXd& coeffs) const;
};

struct Automorphism {
    LinearMap map;
    /// Normalized multiplicativity defect, see multiplicativity_residual.
    double residual;

    Element operator()(const Element& x) const { return map(x); }
};

/// [L_u, L_v] = L_u L_v - L_v L_u, always a derivation.
LinearMap commutator_derivation(const Element& u, const Element& v);

/// max_{i,j} ||D(c_i∘c_j) - Dc_i∘c_j - c_i∘Dc_j|| / (1 + ||D||_F).
/// Bilinear in the probe pair, so checking basis pairs is exhaustive.
double leibniz_residual(const LinearMap& d);

/// max_{i,j} ||X(c_i∘c_j) - Xc_i∘Xc_j|| / (1 + ||X||_F)^2.
double multiplicativity_residual(const LinearMap& x);

bool is_derivation(const LinearMap& d, double tol = 1e-9);

/// Spans {[L_{c_i}, L_{c_j}] : i < j} and orthonormalizes with modified
/// Gram-Schmidt (two passes); directions whose residual norm falls below
/// rank_tol times the largest commutator norm are dropped.
DerivationBasis derivation_basis(const AlgebraSpec& algebra, double rank_tol = 1e-9);

/// exp(A) by scaling and squaring: A is halved until ||A||_1 ≤ 0.5, then a
/// Taylor series is summed to machine precision.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// exp(tD). Throws std::invalid_argument when D fails is_derivation.
Automorphism exp_derivation(const LinearMap& d, double t = 1.0);

/// H - Σ ⟨H, D_k⟩ D_k.
LinearMap project_perp_derivations(const LinearMap& h, const DerivationBasis& basis);

/// residual = max_k |⟨a, D_k b⟩| / (1 + ||a|| ||b||).
CommuteVerdict<double> commutes_via_derivations(const Element& a, const Element& b,
                                                const DerivationBasis& basis, double tol);

/// residual = ||P_Der(a ⊗ b)||_F / (1 + ||a|| ||b||): a ⊗ b ∈ Der(V)^⊥ test.
CommuteVerdict<double> tensor_in_perp(const Element& a, const Element& b,
                                      const DerivationBasis& basis, double tol);

/// {D_k x}: velocities of the curves exp(t D_k) x at t = 0.
std::vector<Element> orbit_tangent(const Element& x, const DerivationBasis& basis);

/// Σ ξ_k D_k with ξ_k ~ N(0, scale²); scale < 0 selects 1/sqrt(dim V).
LinearMap random_derivation(const DerivationBasis& basis, Rng& rng, double scale = -1.0);

/// exp of random_derivation; identity component only.
Automorphism random_automorphism(const DerivationBasis& basis, Rng& rng, double scale = -1.0);

/// Orthonormal basis of the stabilizer subalgebra {D ∈ Der(V) : D b = 0}.
DerivationBasis stabilizer_derivations(const DerivationBasis& basis, const Element& b,
                                       double tol = 1e-9);

}  // namespace eja::lie
