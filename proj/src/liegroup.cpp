#include "eja/liegroup.hpp"

#include <cmath>

namespace eja::lie {

namespace {

Element basis_element(const AlgebraSpec& spec, int i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(spec.dim());
    c[i] = 1.0;
    return Element(spec, std::move(c));
}

std::vector<Eigen::MatrixXd> basis_lyapunov(const AlgebraSpec& spec) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(spec.dim()));
    for (int i = 0; i < spec.dim(); ++i) out.push_back(lyapunov_map(basis_element(spec, i)).matrix());
    return out;
}

}  // namespace

LinearMap DerivationBasis::combine(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != dimension())
        throw std::invalid_argument("DerivationBasis::combine: coefficient count mismatch");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(algebra.dim(), algebra.dim());
    for (int k = 0; k < dimension(); ++k) m += coeffs[k] * maps[std::size_t(k)].matrix();
    return LinearMap(algebra, std::move(m));
}

LinearMap commutator_derivation(const Element& u, const Element& v) {
    require_same(u.algebra(), v.algebra(), "commutator_derivation");
    const Eigen::MatrixXd uv = lyapunov_map(u).matrix() * lyapunov_map(v).matrix();
    // L_v L_u = (L_u L_v)^T because Lyapunov maps are self-adjoint
    return LinearMap(u.algebra(), uv - uv.transpose());
}

double leibniz_residual(const LinearMap& d) {
    const AlgebraSpec& spec = d.algebra();
    const Eigen::MatrixXd& dm = d.matrix();
    const auto lc = basis_lyapunov(spec);
    double worst = 0.0;
    for (int i = 0; i < spec.dim(); ++i) {
        // column j of R is D(c_i∘c_j) - Dc_i∘c_j - c_i∘Dc_j
        const Element dci(spec, dm.col(i));
        const Eigen::MatrixXd r = dm * lc[std::size_t(i)] - lyapunov_map(dci).matrix() -
                                  lc[std::size_t(i)] * dm;
        worst = std::max(worst, r.colwise().norm().maxCoeff());
    }
    return worst / (1.0 + dm.norm());
}

double multiplicativity_residual(const LinearMap& x) {
    const AlgebraSpec& spec = x.algebra();
    const Eigen::MatrixXd& xm = x.matrix();
    const auto lc = basis_lyapunov(spec);
    double worst = 0.0;
    for (int i = 0; i < spec.dim(); ++i) {
        const Element xci(spec, xm.col(i));
        const Eigen::MatrixXd r = xm * lc[std::size_t(i)] - lyapunov_map(xci).matrix() * xm;
        worst = std::max(worst, r.colwise().norm().maxCoeff());
    }
    const double s = 1.0 + xm.norm();
    return worst / (s * s);
}

bool is_derivation(const LinearMap& d, double tol) { return leibniz_residual(d) <= tol; }

DerivationBasis derivation_basis(const AlgebraSpec& algebra, double rank_tol) {
    const auto lc = basis_lyapunov(algebra);
    std::vector<Eigen::MatrixXd> candidates;
    double largest = 0.0;
    for (int i = 0; i < algebra.dim(); ++i)
        for (int j = i + 1; j < algebra.dim(); ++j) {
            const Eigen::MatrixXd prod = lc[std::size_t(i)] * lc[std::size_t(j)];
            Eigen::MatrixXd c = prod - prod.transpose();
            const double n = c.norm();
            if (n == 0.0) continue;
            largest = std::max(largest, n);
            candidates.push_back(std::move(c));
        }

    DerivationBasis basis{algebra, {}};
    std::vector<Eigen::MatrixXd> ortho;
    for (auto& c : candidates) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : ortho) c -= q.cwiseProduct(c).sum() * q;
        const double n = c.norm();
        if (n <= rank_tol * largest) continue;
        ortho.push_back(c / n);
    }
    for (auto& q : ortho) basis.maps.emplace_back(algebra, std::move(q));
    return basis;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);

    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 30; ++k) {
        term = term * b / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

Automorphism exp_derivation(const LinearMap& d, double t) {
    const double r = leibniz_residual(d);
    if (r > 1e-9)
        throw std::invalid_argument("exp_derivation: map is not a derivation (Leibniz residual " +
                                    std::to_string(r) + ")");
    LinearMap x(d.algebra(), expm(t * d.matrix()));
    const double defect = multiplicativity_residual(x);
    return Automorphism{std::move(x), defect};
}

LinearMap project_perp_derivations(const LinearMap& h, const DerivationBasis& basis) {
    require_same(h.algebra(), basis.algebra, "project_perp_derivations");
    Eigen::MatrixXd m = h.matrix();
    for (const auto& d : basis.maps) m -= frobenius(h, d) * d.matrix();
    return LinearMap(h.algebra(), std::move(m));
}

CommuteVerdict<double> commutes_via_derivations(const Element& a, const Element& b,
                                                const DerivationBasis& basis, double tol) {
    require_same(a.algebra(), b.algebra(), "commutes_via_derivations");
    double worst = 0.0;
    for (const auto& d : basis.maps) worst = std::max(worst, std::abs(inner(a, d(b))));
    const double r = worst / (1.0 + norm(a) * norm(b));
    return {r <= tol, r};
}

CommuteVerdict<double> tensor_in_perp(const Element& a, const Element& b,
                                      const DerivationBasis& basis, double tol) {
    require_same(a.algebra(), b.algebra(), "tensor_in_perp");
    const LinearMap t = tensor_map(a, b);
    double sq = 0.0;
    for (const auto& d : basis.maps) {
        const double p = frobenius(t, d);
        sq += p * p;
    }
    const double r = std::sqrt(sq) / (1.0 + norm(a) * norm(b));
    return {r <= tol, r};
}

std::vector<Element> orbit_tangent(const Element& x, const DerivationBasis& basis) {
    require_same(x.algebra(), basis.algebra, "orbit_tangent");
    std::vector<Element> out;
    out.reserve(basis.maps.size());
    for (const auto& d : basis.maps) out.push_back(d(x));
    return out;
}

LinearMap random_derivation(const DerivationBasis& basis, Rng& rng, double scale) {
    if (scale < 0.0) scale = 1.0 / std::sqrt(static_cast<double>(basis.algebra.dim()));
    return basis.combine(random_normal(basis.dimension(), rng, scale));
}

Automorphism random_automorphism(const DerivationBasis& basis, Rng& rng, double scale) {
    LinearMap x(basis.algebra, expm(random_derivation(basis, rng, scale).matrix()));
    const double defect = multiplicativity_residual(x);
    return Automorphism{std::move(x), defect};
}

DerivationBasis stabilizer_derivations(const DerivationBasis& basis, const Element& b, double tol) {
    require_same(b.algebra(), basis.algebra, "stabilizer_derivations");
    DerivationBasis out{basis.algebra, {}};
    const int k = basis.dimension();
    if (k == 0) return out;
    Eigen::MatrixXd m(b.dim(), k);
    for (int j = 0; j < k; ++j) m.col(j) = basis.maps[std::size_t(j)](b).coords();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = tol * (1.0 + norm(b));
    for (int j = 0; j < k; ++j) {
        const double s = j < sv.size() ? sv[j] : 0.0;
        if (s <= cutoff) out.maps.push_back(basis.combine(svd.matrixV().col(j)));
    }
    return out;
}

}  // namespace eja::lie
