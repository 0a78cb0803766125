#include "eja/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace eja::opt {

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxHalvings = 60;
constexpr double kKappaSafe = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sense_sign(Sense s) { return s == Sense::Min ? 1.0 : -1.0; }

bool trivial_orbit_factor(const AlgebraSpec& f) {
    return f.kind() == AlgebraKind::RealVector || (f.kind() == AlgebraKind::SpinFactor && f.order() == 2) ||
           (f.kind() == AlgebraKind::SymMatrix && f.order() == 1);
}

Eigen::VectorXd pav_nonincreasing(Eigen::VectorXd v) {
    // pool adjacent violators for a nonincreasing fit with unit weights
    const Eigen::Index n = v.size();
    std::vector<double> sum;
    std::vector<Eigen::Index> count;
    for (Eigen::Index i = 0; i < n; ++i) {
        sum.push_back(v[i]);
        count.push_back(1);
        while (sum.size() > 1) {
            const std::size_t k = sum.size() - 1;
            if (sum[k - 1] / double(count[k - 1]) >= sum[k] / double(count[k])) break;
            sum[k - 1] += sum[k];
            count[k - 1] += count[k];
            sum.pop_back();
            count.pop_back();
        }
    }
    Eigen::Index i = 0;
    for (std::size_t k = 0; k < sum.size(); ++k)
        for (Eigen::Index j = 0; j < count[k]; ++j) v[i++] = sum[k] / double(count[k]);
    return v;
}

/// Frame of x whose idempotents inside each tied block of λ(x) diagonalize the
/// compression of g to that block, so eigenvalue steps see every direction
/// the tie leaves free.
JordanFrame aligned_frame(const SpectralDecomposition& dec, const Element& g) {
    JordanFrame frame = dec.frame;
    const double shift = 1.0 + 2.0 * norm(g);
    for (const auto& block : dec.multiplicity_blocks) {
        if (block.size() < 2) continue;
        Element c = Element::zero(g.algebra());
        for (int i : block) c += frame[std::size_t(i)];
        // P(c)g = 2 c∘(c∘g) − c∘g lives in the Peirce space of c, whose unit is c
        const Element cg = jordan_product(c, g);
        const Element z = 2.0 * jordan_product(c, cg) - cg + shift * c;
        const auto inner_dec = spectral_decompose(z);
        for (std::size_t k = 0; k < block.size(); ++k)
            frame.idempotents[std::size_t(block[k])] = inner_dec.frame[k];
    }
    return frame;
}

const lie::DerivationBasis& basis_for(const AlgebraSpec& spec, const lie::DerivationBasis* given,
                                      std::optional<lie::DerivationBasis>& storage) {
    if (given) {
        require_same(given->algebra, spec, "solver derivation basis");
        return *given;
    }
    storage = lie::derivation_basis(spec);
    return *storage;
}

/// Point state of a descent: φ = ±objective, g = ±gradient, r_k = ⟨g, D_k x⟩.
struct Probe {
    Element x;
    double phi = 0.0;
    Element g;
    Eigen::VectorXd r;
};

class Engine {
public:
    Engine(const Objective& obj, const lie::DerivationBasis& basis, const SolverParams& params)
        : obj_(obj), basis_(basis), params_(params), sign_(sense_sign(obj.sense)) {}

    int m() const { return basis_.dimension(); }

    double phi(const Element& x) const {
        const double v = obj_.value(x);
        return std::isfinite(v) ? sign_ * v : kInf;
    }

    Eigen::VectorXd chart_gradient(const Element& x, const Element& g) const {
        Eigen::VectorXd r(m());
        for (int k = 0; k < m(); ++k)
            r[k] = g.coords().dot(basis_.maps[std::size_t(k)].matrix() * x.coords());
        return r;
    }

    Probe probe(const Element& x) const { return probe(x, phi(x)); }

    Probe probe(const Element& x, double phi_x) const {
        Probe p{x, phi_x, sign_ * obj_.gradient(x), Eigen::VectorXd()};
        p.r = chart_gradient(x, p.g);
        return p;
    }

    Eigen::MatrixXd generator(const Eigen::VectorXd& s) const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(basis_.algebra.dim(), basis_.algebra.dim());
        for (int k = 0; k < m(); ++k) a += s[k] * basis_.maps[std::size_t(k)].matrix();
        return a;
    }

    Element move(const Element& x, const Eigen::MatrixXd& a, double t) const {
        return Element(x.algebra(), lie::expm(t * a) * x.coords());
    }

    /// Modified Newton direction in exponential-chart coordinates.
    std::optional<Eigen::VectorXd> newton_direction(const Probe& p) const {
        if (m() == 0) return std::nullopt;
        const double h = fd_step(p.x);
        Eigen::MatrixXd hess(m(), m());
        for (int j = 0; j < m(); ++j) {
            const Eigen::MatrixXd& dj = basis_.maps[std::size_t(j)].matrix();
            const Element xp = move(p.x, dj, h);
            const Element xm = move(p.x, dj, -h);
            const Eigen::VectorXd rp = chart_gradient(xp, sign_ * obj_.gradient(xp));
            const Eigen::VectorXd rm = chart_gradient(xm, sign_ * obj_.gradient(xm));
            hess.col(j) = (rp - rm) / (2.0 * h);
        }
        if (!hess.allFinite()) return std::nullopt;
        hess = (0.5 * (hess + hess.transpose())).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        Eigen::VectorXd lam = es.eigenvalues().cwiseAbs();
        const double floor = 1e-8 * (1.0 + lam.maxCoeff());
        for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = 1.0 / std::max(lam[i], floor);
        Eigen::VectorXd s = -(es.eigenvectors() * (lam.asDiagonal() * (es.eigenvectors().transpose() * p.r)));
        if (!s.allFinite() || s.dot(p.r) >= 0.0) return std::nullopt;
        return s;
    }

    /// Armijo backtracking along exp(t Σ s_k D_k) x from t = 1.
    bool frame_search(Probe& p, const Eigen::VectorXd& s) const {
        const double dd = s.dot(p.r);
        if (!(dd < 0.0)) return false;
        const Eigen::MatrixXd a = generator(s);
        double t = 1.0;
        for (int h = 0; h < kMaxHalvings; ++h, t *= kBacktrack) {
            const Element y = move(p.x, a, t);
            const double py = phi(y);
            if (!std::isfinite(py)) continue;
            if (py <= p.phi + kArmijoC1 * t * dd) {
                p = probe(y, py);
                return true;
            }
            if (py <= p.phi + slack(p.phi)) {
                Probe q = probe(y, py);
                if (q.r.norm() < p.r.norm()) {
                    p = std::move(q);
                    return true;
                }
            }
        }
        return false;
    }

    /// One orbit step: Newton when enabled and available, else steepest descent.
    bool frame_step(Probe& p) const {
        if (m() == 0 || p.r.norm() == 0.0) return false;
        if (params_.newton && obj_.kind != Objective::Kind::Kappa) {
            if (auto s = newton_direction(p); s && frame_search(p, *s)) return true;
        }
        return frame_search(p, -p.r);
    }

    static double slack(double phi) { return 1e-12 * (1.0 + std::abs(phi)); }

private:
    double fd_step(const Element& x) const {
        double h = 1e-4;
        if (obj_.kind == Objective::Kind::MaxAffine && obj_.smoothing > 0.0) {
            double cmax = 0.0;
            for (const auto& c : obj_.generators) cmax = std::max(cmax, norm(c));
            h = std::min(h, 0.1 * obj_.smoothing / (1.0 + cmax * norm(x)));
        }
        return h;
    }

    const Objective& obj_;
    const lie::DerivationBasis& basis_;
    const SolverParams& params_;
    double sign_;
};

/// Kappa gradients are central differences; below this their rounding
/// error dominates the stationarity measure.
constexpr double kFdStationarityFloor = 1e-8;

double effective_tol(const Objective& obj, const SolverParams& params) {
    return obj.kind == Objective::Kind::Kappa ? std::max(params.tol, kFdStationarityFloor) : params.tol;
}

void finish(OptResult& out, const Objective& obj, const Probe& p, double stationarity, const SolverParams& params) {
    out.x = p.x;
    out.value = obj.value(p.x);
    out.stationarity = stationarity;
    out.converged = stationarity <= effective_tol(obj, params);
    out.diagnostics = commutation_report(obj, p.x, params.commute_tol);
}

void require_params(const SolverParams& params) {
    if (params.max_iters < 0) throw std::invalid_argument("solver: max_iters must be >= 0");
    if (!(params.tol >= 0.0)) throw std::invalid_argument("solver: tol must be >= 0");
    if (params.starts < 1) throw std::invalid_argument("solver: starts must be >= 1");
}

}  // namespace

std::string to_string(Sense s) { return s == Sense::Min ? "min" : "max"; }

Sense parse_sense(const std::string& s) {
    if (s == "min") return Sense::Min;
    if (s == "max") return Sense::Max;
    throw std::invalid_argument("sense must be 'min' or 'max', got '" + s + "'");
}

// ---------------------------------------------------------------- FeasibleSet

FeasibleSet FeasibleSet::orbit(const Element& b) {
    FeasibleSet s(Kind::Orbit, b.algebra());
    s.b_ = b;
    return s;
}

FeasibleSet FeasibleSet::spectral_box(const AlgebraSpec& algebra, Eigen::VectorXd lower, Eigen::VectorXd upper) {
    const Eigen::Index n = algebra.rank();
    if (lower.size() != n || upper.size() != n)
        throw std::invalid_argument("spectral_box: bounds must have length rank = " + std::to_string(n));
    if (!lower.allFinite() || !upper.allFinite()) throw std::invalid_argument("spectral_box: bounds must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lower[i] > upper[i]) throw std::invalid_argument("spectral_box: empty box (lower > upper)");
        if (i > 0 && (lower[i] > lower[i - 1] || upper[i] > upper[i - 1]))
            throw std::invalid_argument("spectral_box: bounds must be nonincreasing");
    }
    FeasibleSet s(Kind::SpectralBox, algebra);
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

const Element& FeasibleSet::b() const {
    if (!b_) throw std::invalid_argument("FeasibleSet::b: not an orbit");
    return *b_;
}

double FeasibleSet::defect(const Element& x) const {
    require_same(x.algebra(), algebra_, "FeasibleSet::defect");
    if (kind_ == Kind::Orbit) {
        const auto xs = split(x);
        const auto bs = split(*b_);
        double sq = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (trivial_orbit_factor(xs[k].algebra()))
                sq += (xs[k].coords() - bs[k].coords()).squaredNorm();
            else
                sq += (eigenvalue_map(xs[k]) - eigenvalue_map(bs[k])).squaredNorm();
        }
        return std::sqrt(sq);
    }
    const Eigen::VectorXd l = eigenvalue_map(x);
    return std::max({0.0, (lower_ - l).maxCoeff(), (l - upper_).maxCoeff()});
}

Eigen::VectorXd FeasibleSet::project_eigenvalues(const Eigen::VectorXd& u) const {
    if (kind_ != Kind::SpectralBox) throw std::invalid_argument("project_eigenvalues: not a spectral box");
    const Eigen::Index n = u.size();
    if (n != lower_.size()) throw std::invalid_argument("project_eigenvalues: length mismatch");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return u[i] > u[j]; });
    Eigen::VectorXd q(n);
    for (Eigen::Index k = 0; k < n; ++k) q[k] = std::clamp(u[order[std::size_t(k)]], lower_[k], upper_[k]);
    q = pav_nonincreasing(q);
    for (Eigen::Index k = 0; k < n; ++k) q[k] = std::clamp(q[k], lower_[k], upper_[k]);
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) out[order[std::size_t(k)]] = q[k];
    return out;
}

// ------------------------------------------------------------------ Objective

Objective Objective::linear(const Element& c, Sense sense, std::optional<specfun::SpectralFunction> f) {
    Objective o;
    o.kind = Kind::Linear;
    o.sense = sense;
    o.algebra = c.algebra();
    o.c = c;
    if (f) require_same(f->algebra, o.algebra, "Objective::linear");
    o.f = std::move(f);
    return o;
}

Objective Objective::quadratic(const LinearMap& m, const Element& c, Sense sense,
                               std::optional<specfun::SpectralFunction> f) {
    require_same(m.algebra(), c.algebra(), "Objective::quadratic");
    Objective o = linear(c, sense, std::move(f));
    o.kind = Kind::Quadratic;
    o.m = m;
    return o;
}

Objective Objective::shifted(const specfun::SpectralFunction& g, const Element& a, Sense sense,
                             std::optional<specfun::SpectralFunction> f) {
    require_same(g.algebra, a.algebra(), "Objective::shifted");
    Objective o;
    o.kind = Kind::Shifted;
    o.sense = sense;
    o.algebra = a.algebra();
    o.a = a;
    o.g = g;
    if (f) require_same(f->algebra, o.algebra, "Objective::shifted");
    o.f = std::move(f);
    return o;
}

Objective Objective::max_affine(std::vector<Element> generators, Eigen::VectorXd offsets, Sense sense,
                                double smoothing, std::optional<specfun::SpectralFunction> f) {
    if (generators.empty()) throw std::invalid_argument("Objective::max_affine: no generators");
    if (offsets.size() != static_cast<Eigen::Index>(generators.size()))
        throw std::invalid_argument("Objective::max_affine: offsets/generators length mismatch");
    if (!(smoothing >= 0.0)) throw std::invalid_argument("Objective::max_affine: smoothing must be >= 0");
    Objective o;
    o.kind = Kind::MaxAffine;
    o.sense = sense;
    o.algebra = generators.front().algebra();
    for (const auto& c : generators) require_same(c.algebra(), o.algebra, "Objective::max_affine");
    o.generators = std::move(generators);
    o.offsets = std::move(offsets);
    o.smoothing = smoothing;
    if (f) require_same(f->algebra, o.algebra, "Objective::max_affine");
    o.f = std::move(f);
    return o;
}

Objective Objective::kappa(const Element& a, Sense sense) {
    Objective o;
    o.kind = Kind::Kappa;
    o.sense = sense;
    o.algebra = a.algebra();
    o.a = a;
    return o;
}

Eigen::VectorXd Objective::affine_values(const Element& x) const {
    if (kind != Kind::MaxAffine) throw std::invalid_argument("affine_values: not a max-affine objective");
    Eigen::VectorXd z(offsets.size());
    for (std::size_t j = 0; j < generators.size(); ++j)
        z[Eigen::Index(j)] = generators[j].coords().dot(x.coords()) + offsets[Eigen::Index(j)];
    return z;
}

Eigen::VectorXd Objective::affine_weights(const Element& x) const {
    const Eigen::VectorXd z = affine_values(x);
    Eigen::Index jmax = 0;
    const double zmax = z.maxCoeff(&jmax);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(z.size());
    if (smoothing == 0.0) {
        w[jmax] = 1.0;
        return w;
    }
    w = ((z.array() - zmax) / smoothing).exp().matrix();
    return w / w.sum();
}

double Objective::theta(const Element& x) const {
    require_same(x.algebra(), algebra, "Objective::theta");
    switch (kind) {
        case Kind::Linear: return inner(*c, x);
        case Kind::Quadratic: return 0.5 * x.coords().dot(m->matrix() * x.coords()) + inner(*c, x);
        case Kind::Shifted: return (*g)(x - *a);
        case Kind::MaxAffine: {
            const Eigen::VectorXd z = affine_values(x);
            const double zmax = z.maxCoeff();
            if (smoothing == 0.0) return zmax;
            return zmax + smoothing * std::log(((z.array() - zmax) / smoothing).exp().sum());
        }
        case Kind::Kappa: {
            const Eigen::VectorXd l = eigenvalue_map(x + *a);
            const double lmin = l[l.size() - 1];
            if (!(lmin > kKappaSafe)) return kInf;
            return l[0] / lmin;
        }
    }
    return kInf;
}

double Objective::value(const Element& x) const {
    const double t = theta(x);
    return f ? t + (*f)(x) : t;
}

Element Objective::theta_gradient(const Element& x) const {
    require_same(x.algebra(), algebra, "Objective::theta_gradient");
    switch (kind) {
        case Kind::Linear: return *c;
        case Kind::Quadratic: {
            const Eigen::MatrixXd& mm = m->matrix();
            return Element(algebra, 0.5 * (mm * x.coords() + mm.transpose() * x.coords())) + *c;
        }
        case Kind::Shifted: return specfun::spectral_subgradient(*g, x - *a);
        case Kind::MaxAffine: {
            const Eigen::VectorXd w = affine_weights(x);
            Element v = Element::zero(algebra);
            for (std::size_t j = 0; j < generators.size(); ++j)
                if (w[Eigen::Index(j)] != 0.0) v += w[Eigen::Index(j)] * generators[j];
            return v;
        }
        case Kind::Kappa: {
            const double h = 1e-6 * (1.0 + norm(x));
            const double t0 = theta(x);
            Eigen::VectorXd grad(algebra.dim());
            Eigen::VectorXd xp = x.coords();
            for (int i = 0; i < algebra.dim(); ++i) {
                xp[i] = x.coords()[i] + h;
                const double tp = theta(Element(algebra, xp));
                xp[i] = x.coords()[i] - h;
                const double tm = theta(Element(algebra, xp));
                xp[i] = x.coords()[i];
                if (std::isfinite(tp) && std::isfinite(tm))
                    grad[i] = (tp - tm) / (2.0 * h);
                else if (std::isfinite(tp) && std::isfinite(t0))
                    grad[i] = (tp - t0) / h;
                else if (std::isfinite(tm) && std::isfinite(t0))
                    grad[i] = (t0 - tm) / h;
                else
                    throw std::domain_error("kappa gradient: objective not finite near x");
            }
            return Element(algebra, std::move(grad));
        }
    }
    throw std::logic_error("Objective::theta_gradient: unknown kind");
}

Element Objective::gradient(const Element& x) const {
    Element v = theta_gradient(x);
    if (f) v += specfun::spectral_subgradient(*f, x);
    return v;
}

std::string Objective::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Linear: os << "linear"; break;
        case Kind::Quadratic: os << "quadratic"; break;
        case Kind::Shifted: os << "shifted(" << g->f.name << ")"; break;
        case Kind::MaxAffine: os << "maxaffine(m=" << generators.size() << ",mu=" << smoothing << ")"; break;
        case Kind::Kappa: os << "kappa"; break;
    }
    if (f) os << "+" << f->f.name;
    os << " " << to_string(sense);
    return os.str();
}

// ------------------------------------------------------------ diagnostics

double CommutationReport::residual(const std::string& label) const {
    for (const auto& [l, r] : pairs)
        if (l == label) return r;
    throw std::out_of_range("CommutationReport: no pair '" + label + "'");
}

double CommutationReport::worst() const {
    double w = 0.0;
    for (const auto& pr : pairs) w = std::max(w, pr.second);
    return w;
}

CommutationReport commutation_report(const Objective& obj, const Element& x, double tol) {
    CommutationReport rep;
    rep.tol = tol;
    if (obj.a) rep.pairs.emplace_back("x vs a", operator_commutes(x, *obj.a, tol).residual);
    if (obj.c) rep.pairs.emplace_back("x vs c", operator_commutes(x, *obj.c, tol).residual);
    try {
        rep.pairs.emplace_back("x vs gradient", operator_commutes(x, obj.theta_gradient(x), tol).residual);
    } catch (const std::domain_error&) {
    }
    return rep;
}

// ------------------------------------------------------------------- solvers

OptResult orbit_descent(const Objective& obj, const FeasibleSet& set, const std::optional<Element>& x0,
                        const SolverParams& params, const lie::DerivationBasis* basis) {
    if (set.kind() != FeasibleSet::Kind::Orbit) throw std::invalid_argument("orbit_descent: set is not an orbit");
    require_same(obj.algebra, set.algebra(), "orbit_descent");
    require_params(params);
    std::optional<lie::DerivationBasis> storage;
    const auto& der = basis_for(set.algebra(), basis, storage);
    const Engine eng(obj, der, params);

    Element start = set.b();
    if (x0) {
        require_same(x0->algebra(), set.algebra(), "orbit_descent x0");
        if (set.contains(*x0, 1e-8 * (1.0 + norm(set.b())))) start = *x0;
    }
    Probe p = eng.probe(start);
    if (!std::isfinite(p.phi)) throw std::domain_error("orbit_descent: objective not finite at x0");

    OptResult out;
    out.history.push_back(obj.value(p.x));
    const double tol = effective_tol(obj, params);
    while (out.iterations < params.max_iters && p.r.norm() > tol) {
        if (!eng.frame_step(p)) {
            out.line_search_failed = true;
            break;
        }
        ++out.iterations;
        out.history.push_back(obj.value(p.x));
    }
    finish(out, obj, p, p.r.size() ? p.r.norm() : 0.0, params);
    return out;
}

OptResult spectralbox_descent(const Objective& obj, const FeasibleSet& set, const std::optional<Element>& x0,
                              const SolverParams& params, const lie::DerivationBasis* basis) {
    if (set.kind() != FeasibleSet::Kind::SpectralBox)
        throw std::invalid_argument("spectralbox_descent: set is not a spectral box");
    require_same(obj.algebra, set.algebra(), "spectralbox_descent");
    require_params(params);
    std::optional<lie::DerivationBasis> storage;
    const auto& der = basis_for(set.algebra(), basis, storage);
    const Engine eng(obj, der, params);
    const double sign = sense_sign(obj.sense);

    Element start = Element::zero(set.algebra());
    if (x0) {
        require_same(x0->algebra(), set.algebra(), "spectralbox_descent x0");
        start = *x0;
    }
    {
        const auto dec = spectral_decompose(start);
        start = assemble(dec.frame, set.project_eigenvalues(dec.eigenvalues));
    }
    Probe p = eng.probe(start);
    if (!std::isfinite(p.phi)) throw std::domain_error("spectralbox_descent: objective not finite at x0");

    OptResult out;
    out.history.push_back(obj.value(p.x));
    double stationarity = 0.0;
    const double tol = effective_tol(obj, params);
    for (;;) {
        auto dec = spectral_decompose(p.x);
        dec.frame = aligned_frame(dec, p.g);
        Eigen::VectorXd gu(dec.eigenvalues.size());
        for (Eigen::Index i = 0; i < gu.size(); ++i) gu[i] = inner(p.g, dec.frame[std::size_t(i)]);
        const Eigen::VectorXd pg = dec.eigenvalues - set.project_eigenvalues(dec.eigenvalues - gu);
        const double rn = p.r.size() ? p.r.norm() : 0.0;
        stationarity = std::hypot(rn, pg.norm());
        if (stationarity <= tol || out.iterations >= params.max_iters) break;

        bool moved = false;
        if (rn > 0.0 && eng.frame_step(p)) {
            moved = true;
            dec = spectral_decompose(p.x);
            dec.frame = aligned_frame(dec, p.g);
            for (Eigen::Index i = 0; i < gu.size(); ++i) gu[i] = inner(p.g, dec.frame[std::size_t(i)]);
        }

        const Eigen::VectorXd& u = dec.eigenvalues;
        double t = 1.0;
        for (int h = 0; h < kMaxHalvings; ++h, t *= kBacktrack) {
            const Eigen::VectorXd w = set.project_eigenvalues(u - t * gu);
            const double dd = gu.dot(w - u);
            if (!(dd < 0.0)) break;
            const Element y = assemble(dec.frame, w);
            const double vy = obj.value(y);
            if (!std::isfinite(vy)) continue;
            const double py = sign * vy;
            if (py <= p.phi + kArmijoC1 * dd) {
                p = eng.probe(y, py);
                moved = true;
                break;
            }
        }
        if (!moved) {
            out.line_search_failed = true;
            break;
        }
        ++out.iterations;
        out.history.push_back(obj.value(p.x));
    }
    finish(out, obj, p, stationarity, params);
    return out;
}

std::vector<Element> multistart_points(const FeasibleSet& set, int starts, std::uint64_t seed, double spread,
                                       const lie::DerivationBasis* basis) {
    if (starts < 1) throw std::invalid_argument("multistart: starts must be >= 1");
    std::optional<lie::DerivationBasis> storage;
    const auto& der = basis_for(set.algebra(), basis, storage);
    std::vector<Element> out;
    for (int i = 0; i < starts; ++i) {
        Rng rng(derive_seed(seed, std::uint64_t(i)));
        if (set.kind() == FeasibleSet::Kind::Orbit) {
            if (der.dimension() == 0) {
                out.push_back(set.b());
                continue;
            }
            const LinearMap d = lie::random_derivation(der, rng, spread);
            out.emplace_back(set.algebra(), lie::expm(d.matrix()) * set.b().coords());
        } else {
            Eigen::VectorXd u(set.lower().size());
            for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = uniform(rng, set.lower()[k], set.upper()[k]);
            u = set.project_eigenvalues(u);
            const auto frame = spectral_decompose(random_element(set.algebra(), rng)).frame;
            out.push_back(assemble(frame, u));
        }
    }
    return out;
}

OptResult multistart(const Objective& obj, const FeasibleSet& set, const SolverParams& params,
                     const lie::DerivationBasis* basis) {
    require_params(params);
    std::optional<lie::DerivationBasis> storage;
    const auto& der = basis_for(set.algebra(), basis, storage);
    const auto points = multistart_points(set, params.starts, params.seed, params.spread, &der);
    const double sign = sense_sign(obj.sense);
    std::optional<OptResult> best;
    std::string last_error;
    for (int i = 0; i < params.starts; ++i) {
        OptResult r;
        try {
            r = set.kind() == FeasibleSet::Kind::Orbit ? orbit_descent(obj, set, points[std::size_t(i)], params, &der)
                                                       : spectralbox_descent(obj, set, points[std::size_t(i)], params, &der);
        } catch (const std::exception& e) {
            last_error = e.what();
            continue;
        }
        r.start = i;
        if (!best) {
            best = std::move(r);
            continue;
        }
        const double band = 1e-12 * (1.0 + std::abs(best->value));
        const double gain = sign * (best->value - r.value);
        if (gain > band || (gain >= -band && r.converged && !best->converged)) best = std::move(r);
    }
    if (!best) throw std::runtime_error("multistart: every start failed: " + last_error);
    return *best;
}

// -------------------------------------------------------------------- oracle

std::vector<Element> permutation_candidates(const Element& anchor, const Element& b) {
    require_same(anchor.algebra(), b.algebra(), "permutation_candidates");
    if (anchor.algebra().rank() > 9) throw std::invalid_argument("permutation_oracle: rank > 9");
    const auto as = split(anchor);
    const auto bs = split(b);
    std::vector<std::vector<Element>> options(as.size());
    for (std::size_t k = 0; k < as.size(); ++k) {
        if (trivial_orbit_factor(as[k].algebra())) {
            options[k].push_back(bs[k]);
            continue;
        }
        const auto dec = spectral_decompose(as[k]);
        const Eigen::VectorXd& l = dec.eigenvalues;
        const double tol = 1e-8 * (1.0 + l.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 1; i < l.size(); ++i)
            if (l[i - 1] - l[i] <= tol)
                throw std::invalid_argument("permutation_oracle: anchor has tied eigenvalues (frame not unique)");
        Eigen::VectorXd lb = eigenvalue_map(bs[k]);
        std::sort(lb.data(), lb.data() + lb.size());
        do {
            options[k].push_back(assemble(dec.frame, lb));
        } while (std::next_permutation(lb.data(), lb.data() + lb.size()));
    }
    std::vector<Element> out;
    std::vector<std::size_t> idx(as.size(), 0);
    for (;;) {
        std::vector<Element> parts;
        for (std::size_t k = 0; k < as.size(); ++k) parts.push_back(options[k][idx[k]]);
        out.push_back(join(anchor.algebra(), parts));
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return out;
}

OptResult permutation_oracle(const Objective& obj, const Element& b) {
    const Element* anchor = nullptr;
    if (obj.kind == Objective::Kind::Shifted) anchor = &*obj.a;
    if (obj.kind == Objective::Kind::Linear) anchor = &*obj.c;
    if (!anchor) throw std::invalid_argument("permutation_oracle: objective must be shifted or linear");
    const auto cands = permutation_candidates(*anchor, b);
    const double sign = sense_sign(obj.sense);
    std::size_t best = 0;
    double best_phi = kInf;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const double phi = sign * obj.value(cands[i]);
        if (phi < best_phi) {
            best_phi = phi;
            best = i;
        }
    }
    OptResult out;
    out.x = cands[best];
    out.value = obj.value(out.x);
    out.iterations = static_cast<int>(cands.size());
    out.converged = true;
    out.diagnostics = commutation_report(obj, out.x, SolverParams{}.commute_tol);
    out.history.push_back(out.value);
    return out;
}

OptResult permutation_oracle(const Element& a, const Element& b, const specfun::SpectralFunction& f, Sense sense) {
    return permutation_oracle(Objective::shifted(f, a, sense), b);
}

double kappa_clipping_oracle(const Eigen::VectorXd& lambda_a, double eps) {
    if (lambda_a.size() == 0) throw std::invalid_argument("kappa_clipping_oracle: empty spectrum");
    if (!(eps >= 0.0)) throw std::invalid_argument("kappa_clipping_oracle: eps must be >= 0");
    const double lo = lambda_a.minCoeff() + eps;
    if (!(lo > 0.0)) throw std::domain_error("kappa_clipping_oracle: λ_min(a) + eps must be positive");
    return std::max(1.0, (lambda_a.maxCoeff() - eps) / lo);
}

}  // namespace eja::opt
