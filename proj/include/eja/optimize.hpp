#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eja/liegroup.hpp"
#include "eja/specfun.hpp"

namespace eja::opt {

enum class Sense { Min, Max };

std::string to_string(Sense s);
Sense parse_sense(const std::string& s);

class FeasibleSet {
public:
    enum class Kind { Orbit, SpectralBox };

    /// {Xb : X in the identity component of Aut(V)}.
    static FeasibleSet orbit(const Element& b);
    /// λ⁻¹(Q) with Q = {u : lower_i ≤ u↓_i ≤ upper_i}. Bounds must be
    /// nonincreasing with lower ≤ upper.
    static FeasibleSet spectral_box(const AlgebraSpec& algebra, Eigen::VectorXd lower,
                                    Eigen::VectorXd upper);

    Kind kind() const noexcept { return kind_; }
    const AlgebraSpec& algebra() const noexcept { return algebra_; }
    /// Orbit generator; throws for boxes.
    const Element& b() const;
    const Eigen::VectorXd& lower() const noexcept { return lower_; }
    const Eigen::VectorXd& upper() const noexcept { return upper_; }

    /// Distance-like feasibility defect: ‖λ(x) − λ(b)‖ for orbits, the
    /// largest bound violation of λ(x) for boxes.
    double defect(const Element& x) const;
    bool contains(const Element& x, double tol = 1e-8) const { return defect(x) <= tol; }

    /// Nearest point of the sorted box to u (u in any order; the result keeps
    /// the order of u).
    Eigen::VectorXd project_eigenvalues(const Eigen::VectorXd& u) const;

private:
    FeasibleSet(Kind kind, AlgebraSpec algebra) : kind_(kind), algebra_(std::move(algebra)) {}

    Kind kind_;
    AlgebraSpec algebra_;
    std::optional<Element> b_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// Objective Θ(x) + F(x) with Θ one of
///   Linear     ⟨c, x⟩
///   Quadratic  ½⟨x, Mx⟩ + ⟨c, x⟩
///   Shifted    G(x − a), G spectral
///   MaxAffine  max_j (⟨c_j, x⟩ + d_j), log-sum-exp smoothed when smoothing > 0
///   Kappa      κ(x + a)
/// and F an optional spectral function.
struct Objective {
    enum class Kind { Linear, Quadratic, Shifted, MaxAffine, Kappa };

    Kind kind = Kind::Linear;
    Sense sense = Sense::Min;
    AlgebraSpec algebra = AlgebraSpec::real_vector(1);
    std::optional<Element> c;
    std::optional<LinearMap> m;
    std::optional<Element> a;
    std::optional<specfun::SpectralFunction> g;
    std::vector<Element> generators;
    Eigen::VectorXd offsets;
    double smoothing = 0.0;
    std::optional<specfun::SpectralFunction> f;

    static Objective linear(const Element& c, Sense sense = Sense::Min,
                            std::optional<specfun::SpectralFunction> f = std::nullopt);
    static Objective quadratic(const LinearMap& m, const Element& c, Sense sense = Sense::Min,
                               std::optional<specfun::SpectralFunction> f = std::nullopt);
    static Objective shifted(const specfun::SpectralFunction& g, const Element& a,
                             Sense sense = Sense::Min,
                             std::optional<specfun::SpectralFunction> f = std::nullopt);
    static Objective max_affine(std::vector<Element> generators, Eigen::VectorXd offsets,
                                Sense sense = Sense::Min, double smoothing = 0.0,
                                std::optional<specfun::SpectralFunction> f = std::nullopt);
    /// κ(x + a), +∞ once λ_min(x + a) ≤ 1e-10.
    static Objective kappa(const Element& a, Sense sense = Sense::Min);

    /// Θ(x) (the smoothed value for MaxAffine with smoothing > 0).
    double theta(const Element& x) const;
    /// Θ(x) + F(x).
    double value(const Element& x) const;
    /// A gradient (or subgradient) of Θ at x.
    Element theta_gradient(const Element& x) const;
    /// theta_gradient plus a spectral subgradient of F.
    Element gradient(const Element& x) const;
    /// ⟨c_j, x⟩ + d_j for every generator (MaxAffine only).
    Eigen::VectorXd affine_values(const Element& x) const;
    /// Softmax weights of the smoothed max (hard argmax indicator when smoothing = 0).
    Eigen::VectorXd affine_weights(const Element& x) const;

    std::string describe() const;
};

struct CommutationReport {
    std::vector<std::pair<std::string, double>> pairs;
    double tol = 1e-6;

    double residual(const std::string& label) const;
    double worst() const;
};

struct OptResult {
    Element x = Element::zero(AlgebraSpec::real_vector(1));
    double value = 0.0;
    int iterations = 0;
    double stationarity = 0.0;
    bool converged = false;
    bool line_search_failed = false;
    CommutationReport diagnostics;
    /// Objective value after every accepted step, starting with x0.
    std::vector<double> history;
    int start = 0;
};

struct SolverParams {
    int max_iters = 300;
    /// Stationarity target; Kappa objectives use max(tol, 1e-8) because
    /// their gradients are finite differences.
    double tol = 1e-10;
    std::uint64_t seed = 0;
    int starts = 1;
    /// Modified Newton steps in derivation coordinates (orbit frame steps).
    bool newton = true;
    /// Spread of random starting automorphisms exp(D), D ~ N(0, spread²) per basis map.
    double spread = 3.141592653589793;
    double commute_tol = 1e-6;
};

/// x ← exp(tD)x with D = Σ β_k D_k, β_k = −⟨∇, D_k x⟩ (ascent for Max),
/// Armijo backtracking, optional modified Newton steps. x0 defaults to b.
OptResult orbit_descent(const Objective& obj, const FeasibleSet& set,
                        const std::optional<Element>& x0, const SolverParams& params,
                        const lie::DerivationBasis* basis = nullptr);

/// Alternates orbit frame steps with projected gradient steps on λ(x).
OptResult spectralbox_descent(const Objective& obj, const FeasibleSet& set,
                              const std::optional<Element>& x0, const SolverParams& params,
                              const lie::DerivationBasis* basis = nullptr);

/// Starting points used by multistart: start i is drawn from
/// Rng(derive_seed(seed, i)).
std::vector<Element> multistart_points(const FeasibleSet& set, int starts, std::uint64_t seed,
                                       double spread = 3.141592653589793,
                                       const lie::DerivationBasis* basis = nullptr);

/// Best of params.starts runs (orbit_descent or spectralbox_descent according
/// to the set). Ties in value go to the lower start index.
OptResult multistart(const Objective& obj, const FeasibleSet& set, const SolverParams& params,
                     const lie::DerivationBasis* basis = nullptr);

/// Orbit points Σ λ_σ(i)(b) e_i(anchor) over permutations σ that keep every
/// simple factor in place. Factors without derivations contribute b unchanged.
/// Throws if the anchor has tied eigenvalues within a factor or rank > 9.
std::vector<Element> permutation_candidates(const Element& anchor, const Element& b);

/// Best of F(x_σ − a) over permutation_candidates(a, b).
OptResult permutation_oracle(const Element& a, const Element& b, const specfun::SpectralFunction& f,
                             Sense sense);
/// Same enumeration for Shifted (anchor a) and Linear (anchor c) objectives.
OptResult permutation_oracle(const Objective& obj, const Element& b);

/// λ-space comparison for κ(x + a) over the box [−eps, eps]ⁿ on the frame of
/// a: optimal value max(1, (λ₁ − eps)/(λₙ + eps)).
double kappa_clipping_oracle(const Eigen::VectorXd& lambda_a, double eps);

/// Diagnostics used by every solver: x vs gradient, plus x vs a / x vs c
/// when the objective carries one.
CommutationReport commutation_report(const Objective& obj, const Element& x, double tol);

}  // namespace eja::opt
