#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eja/optimize.hpp"

namespace eja::verify {

struct Tolerances {
    double commute = 1e-6;
    double feas = 1e-8;
    double value = 1e-6;

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct SuiteConfig {
    AlgebraSpec algebra = AlgebraSpec::sym_matrix(3);
    int trials = 100;
    std::uint64_t seed = 0;
    Tolerances tol;
    /// Solutions are certified only when their stationarity is at most this.
    double stationarity = 1e-8;
    int starts = 8;
    /// kappa suite: box half-width and an optional fixed spectrum for a.
    double eps = 0.3;
    std::optional<Eigen::VectorXd> kappa_eigs;
    /// Worker threads; 0 reads EJA_THREADS, falling back to the hardware count.
    int threads = 0;

    void validate() const;
};

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;
    /// FNV-1a over the coordinates of every random input, hex.
    std::string inputs_hash;
    /// Keys ending in "_margin" must be positive; everything else is a
    /// nonnegative residual.
    std::map<std::string, double> residuals;
    bool passed = true;
    bool skipped = false;
    bool uncertified = false;
    std::string note;
    /// Full inputs, kept for violations so a trial can be replayed and inspected.
    std::map<std::string, std::vector<double>> inputs;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct NegativeControl {
    int trials = 0;
    int hits = 0;
    double threshold = 0.0;
    double required_fraction = 0.95;

    bool ok() const { return trials == 0 || hits >= required_fraction * trials; }
    friend bool operator==(const NegativeControl&, const NegativeControl&) = default;
};

struct SuiteReport {
    std::string name;
    std::string algebra;
    int trials = 0;
    int violations = 0;
    int skipped = 0;
    int uncertified = 0;
    /// Max over trials for residuals, min for margins and the control.
    std::map<std::string, double> worst;
    std::map<std::string, double> limits;
    NegativeControl control;
    std::vector<std::string> notes;
    std::vector<TrialRecord> records;

    /// Zero violations. Control power is reported separately by control.ok().
    bool passed() const { return violations == 0; }
    friend bool operator==(const SuiteReport&, const SuiteReport&) = default;
};

SuiteReport verify_smooth_principle(const SuiteConfig& cfg);
SuiteReport verify_max_principle(const SuiteConfig& cfg);
SuiteReport verify_min_principle(const SuiteConfig& cfg);
SuiteReport verify_shifted_principle(const SuiteConfig& cfg);
SuiteReport verify_normal_cone(const SuiteConfig& cfg);
SuiteReport verify_appendix(const SuiteConfig& cfg);
SuiteReport demo_kappa(const SuiteConfig& cfg, double eps);

const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);
/// One report per suite; `all` expands to every suite in suite_names() order.
std::vector<SuiteReport> run_suite(const std::string& name, const SuiteConfig& cfg);
/// Re-runs one trial of a suite in isolation; equal to records[index] of the full run.
TrialRecord replay_trial(const std::string& name, const SuiteConfig& cfg, int index);

/// Result of certifying the min principle at a computed minimizer.
struct MinCertificate {
    Element x = Element::zero(AlgebraSpec::real_vector(1));
    double stationarity = 0.0;
    std::vector<int> active;
    Eigen::VectorXd weights;
    /// ‖[L_x, L_v]‖_F / (1 + ‖x‖‖v‖) for v = Σ w_j c_j over the active set.
    double residual = 0.0;
    /// Same residual at the starting weights of the simplex search.
    double initial_residual = 0.0;
};

/// Minimizes max_j(⟨c_j,x⟩ + d_j) over the orbit by log-sum-exp continuation,
/// then searches the simplex of active generators for a subgradient that
/// commutes with the minimizer (projected gradient, 500 iterations).
MinCertificate certify_min_principle(const opt::Objective& hard, const opt::FeasibleSet& set,
                                     const SuiteConfig& cfg, const lie::DerivationBasis& basis,
                                     std::uint64_t seed, const std::optional<Element>& x0 = std::nullopt);

/// Projected-gradient search on the simplex minimizing ‖[L_x, L_{Σ w_j c_j}]‖_F.
Eigen::VectorXd simplex_commutation_search(const Element& x, const std::vector<Element>& generators,
                                           Eigen::VectorXd w0, int iterations = 500);

/// SymMatrix(2) instance with two active generators c = m ± p where neither
/// endpoint commutes with the minimizer diag(1,−1) but the midpoint m does.
struct WitnessInstance {
    opt::Objective objective;
    opt::FeasibleSet set;
    Element minimizer;
};
WitnessInstance midpoint_witness_instance();

/// FNV-1a 64-bit hash of a list of coordinate vectors.
std::string hash_inputs(const std::vector<const Eigen::VectorXd*>& parts);

}  // namespace eja::verify
