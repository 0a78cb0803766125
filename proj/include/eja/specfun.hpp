#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "eja/linear_map.hpp"
#include "eja/random.hpp"

namespace eja::specfun {

/// A permutation-invariant f: R^n → R with an optional subgradient oracle.
struct SymmetricFunction {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> value;
    /// Some g ∈ ∂f(u); empty when f has no oracle (nonconvex instances).
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> subgradient;
    bool is_convex = false;
    bool is_strictly_convex = false;
    bool is_norm = false;
    bool is_strictly_convex_norm = false;

    double operator()(const Eigen::VectorXd& u) const { return value(u); }
};

/// (Σ |u_i|^p)^(1/p) for p ≥ 1; strictly convex as a norm iff p > 1.
SymmetricFunction schatten(double p);
/// Σ u_i², strictly convex.
SymmetricFunction sumsq();
/// Σ |u_i|^p for p > 1, strictly convex.
SymmetricFunction power_sum(double p);
/// f ≡ 0.
SymmetricFunction zero_function();

/// `schatten:p`, `powsum:p`, `sumsq`, `zero`.
SymmetricFunction parse_symmetric(const std::string& name);

/// F = f ∘ λ on a fixed algebra.
struct SpectralFunction {
    SymmetricFunction f;
    AlgebraSpec algebra;

    double operator()(const Element& x) const;
};

double spectral_value(const SpectralFunction& F, const Element& x);

/// v = Σ g_i e_i from the frame of x, with g ∈ ∂f(λ(x)) averaged over the
/// multiplicity blocks of λ(x) so that v strongly commutes with x.
Element spectral_subgradient(const SpectralFunction& F, const Element& x);

struct SubgradientVerdict {
    bool accepted = false;
    /// Most negative F(y) - F(x) - ⟨v, y - x⟩ over the probes, relative.
    double worst_inequality = 0.0;
    /// ⟨λ(v), λ(x)⟩ - ⟨v, x⟩.
    double strong_gap = 0.0;
    /// Most negative f(w) - f(λ(x)) - ⟨λ(v), w - λ(x)⟩, relative.
    double worst_lambda_inequality = 0.0;

    explicit operator bool() const noexcept { return accepted; }
};

/// Sampling-based necessary test for v ∈ ∂F(x): the subgradient inequality
/// on random probes at several radii (plus the directions ±x, ±v), strong
/// commutation of v and x, and the same inequality for λ(v) against f at
/// λ(x). Passing does not prove membership.
SubgradientVerdict is_subgradient(const SpectralFunction& F, const Element& x, const Element& v,
                                  double tol = 1e-9, int num_probes = 200,
                                  std::uint64_t seed = 0x5eed);

/// u ≺ v: sorted partial sums of u dominated by those of v, equal totals.
bool majorizes(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct StrictSchurReport {
    int trials = 0;
    int rejected = 0;
    int violations = 0;
    /// min over trials of f(v) - f(u)
    double min_margin = 0.0;
};

/// Random pairs u ≺ v with u↓ ≠ v↓ (u = average of k random permutations of
/// v); counts trials where f(u) < f(v) fails. Requires f.is_strictly_convex.
StrictSchurReport check_strict_schur(const SymmetricFunction& f, int trials, std::uint64_t seed,
                                     int n = 4);

/// κ(x) = λ_max(x) / λ_min(x); throws std::domain_error unless λ_min(x) > 0.
double condition_number(const Element& x);

/// For all i, j with λ_i(x) > λ_j(x) + tol, checks β_i > β_j where β_i =
/// ⟨v, e_i⟩ over the frame {e_i} of x. β = λ(v) whenever v and x strongly
/// commute, which is the setting of subgradients of spectral functions.
bool monotone_pairing_check(const Element& x, const Element& v, double tol = 1e-8);

}  // namespace eja::specfun
