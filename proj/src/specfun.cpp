#include "eja/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eja::specfun {

namespace {

double p_norm(const Eigen::VectorXd& u, double p) {
    const double m = u.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    if (p == 1.0) return u.cwiseAbs().sum();
    if (p == 2.0) return u.norm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]) / m, p);
    return m * std::pow(s, 1.0 / p);
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

std::string trim_number(double p) {
    std::string s = std::to_string(p);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
}

double parse_exponent(const std::string& arg, const char* what) {
    std::size_t used = 0;
    double p = 0.0;
    try {
        p = std::stod(arg, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad ") + what + " exponent: '" + arg + "'");
    }
    if (used != arg.size()) throw std::invalid_argument(std::string("bad ") + what + " exponent: '" + arg + "'");
    return p;
}

}  // namespace

SymmetricFunction schatten(double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("schatten: p must be a finite number >= 1");
    SymmetricFunction f;
    f.name = "schatten:" + trim_number(p);
    f.value = [p](const Eigen::VectorXd& u) { return p_norm(u, p); };
    f.subgradient = [p](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
        const double n = p_norm(u, p);
        if (n == 0.0) return g;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (p == 1.0)
                g[i] = sgn(u[i]);
            else
                g[i] = sgn(u[i]) * std::pow(std::abs(u[i]) / n, p - 1.0);
        }
        return g;
    };
    f.is_convex = true;
    f.is_norm = true;
    f.is_strictly_convex_norm = p > 1.0;
    return f;
}

SymmetricFunction sumsq() {
    SymmetricFunction f;
    f.name = "sumsq";
    f.value = [](const Eigen::VectorXd& u) { return u.squaredNorm(); };
    f.subgradient = [](const Eigen::VectorXd& u) -> Eigen::VectorXd { return 2.0 * u; };
    f.is_convex = true;
    f.is_strictly_convex = true;
    return f;
}

SymmetricFunction power_sum(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("power_sum: p must be a finite number > 1");
    SymmetricFunction f;
    f.name = "powsum:" + trim_number(p);
    f.value = [p](const Eigen::VectorXd& u) { return u.array().abs().pow(p).sum(); };
    f.subgradient = [p](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        Eigen::VectorXd g(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = p * sgn(u[i]) * std::pow(std::abs(u[i]), p - 1.0);
        return g;
    };
    f.is_convex = true;
    f.is_strictly_convex = true;
    return f;
}

SymmetricFunction zero_function() {
    SymmetricFunction f;
    f.name = "zero";
    f.value = [](const Eigen::VectorXd&) { return 0.0; };
    f.subgradient = [](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(u.size());
    };
    f.is_convex = true;
    return f;
}

SymmetricFunction parse_symmetric(const std::string& name) {
    if (name == "sumsq") return sumsq();
    if (name == "zero") return zero_function();
    if (name.rfind("schatten:", 0) == 0) return schatten(parse_exponent(name.substr(9), "schatten"));
    if (name.rfind("powsum:", 0) == 0) return power_sum(parse_exponent(name.substr(7), "powsum"));
    throw std::invalid_argument("unknown symmetric function '" + name + "'");
}

double SpectralFunction::operator()(const Element& x) const { return spectral_value(*this, x); }

double spectral_value(const SpectralFunction& F, const Element& x) {
    require_same(F.algebra, x.algebra(), "spectral_value");
    return F.f(eigenvalue_map(x));
}

Element spectral_subgradient(const SpectralFunction& F, const Element& x) {
    require_same(F.algebra, x.algebra(), "spectral_subgradient");
    if (!F.f.subgradient)
        throw std::invalid_argument("spectral_subgradient: " + F.f.name + " has no subgradient oracle");
    const auto dec = spectral_decompose(x);
    Eigen::VectorXd g = F.f.subgradient(dec.eigenvalues);
    if (g.size() != dec.eigenvalues.size() || !g.allFinite())
        throw std::invalid_argument("spectral_subgradient: oracle undefined at λ(x)");
    for (const auto& block : dec.multiplicity_blocks) {
        if (block.size() < 2) continue;
        double mean = 0.0;
        for (int i : block) mean += g[i];
        mean /= static_cast<double>(block.size());
        for (int i : block) g[i] = mean;
    }
    return assemble(dec.frame, g);
}

SubgradientVerdict is_subgradient(const SpectralFunction& F, const Element& x, const Element& v,
                                  double tol, int num_probes, std::uint64_t seed) {
    require_same(x.algebra(), v.algebra(), "is_subgradient");
    if (!F.f.is_convex) throw std::invalid_argument("is_subgradient: F must be convex");
    Rng rng(seed);
    SubgradientVerdict out;
    const double fx = F(x);
    const double radius0 = 1.0 + norm(x);
    static constexpr double kRadii[] = {1e-3, 1e-1, 1.0, 10.0, 100.0};

    auto check = [&](const Element& y) {
        const double lhs = F(y) - fx - inner(v, y - x);
        const double scale = 1.0 + std::abs(fx) + std::abs(F(y)) + norm(v) * norm(y - x);
        out.worst_inequality = std::min(out.worst_inequality, lhs / scale);
    };
    std::vector<Element> directions;
    if (norm(x) > 0.0) directions.push_back((1.0 / norm(x)) * x);
    if (norm(v) > 0.0) directions.push_back((1.0 / norm(v)) * v);
    for (const auto& d : directions)
        for (double r : kRadii) {
            check(x + (r * radius0) * d);
            check(x - (r * radius0) * d);
        }
    for (int k = 0; k < num_probes; ++k) {
        Element z = random_element(x.algebra(), rng);
        z *= 1.0 / std::max(norm(z), 1e-300);
        check(x + (kRadii[std::size_t(k) % std::size(kRadii)] * radius0) * z);
    }

    const auto sv = strong_operator_commutes(v, x, tol);
    out.strong_gap = sv.residual;

    const Eigen::VectorXd lx = eigenvalue_map(x);
    const Eigen::VectorXd lv = eigenvalue_map(v);
    const double flx = F.f(lx);
    for (int k = 0; k < num_probes; ++k) {
        Eigen::VectorXd w = random_normal(lx.size(), rng);
        w = lx + (kRadii[std::size_t(k) % std::size(kRadii)] * radius0 / std::max(w.norm(), 1e-300)) * w;
        const double fw = F.f(w);
        const double lhs = fw - flx - lv.dot(w - lx);
        const double scale = 1.0 + std::abs(flx) + std::abs(fw) + lv.norm() * (w - lx).norm();
        out.worst_lambda_inequality = std::min(out.worst_lambda_inequality, lhs / scale);
    }

    out.accepted = out.worst_inequality >= -tol && sv.commutes && out.worst_lambda_inequality >= -tol;
    return out;
}

bool majorizes(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw std::invalid_argument("majorizes: length mismatch");
    std::vector<double> us(u.data(), u.data() + u.size());
    std::vector<double> vs(v.data(), v.data() + v.size());
    std::sort(us.begin(), us.end(), std::greater<>());
    std::sort(vs.begin(), vs.end(), std::greater<>());
    const double scale =
        1.0 + std::max(u.size() ? u.cwiseAbs().maxCoeff() : 0.0, v.size() ? v.cwiseAbs().maxCoeff() : 0.0) *
                  static_cast<double>(u.size());
    const double tol = 1e-10 * scale;
    double su = 0.0;
    double sv = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k) {
        su += us[k];
        sv += vs[k];
        if (su > sv + tol) return false;
    }
    return std::abs(su - sv) <= tol;
}

StrictSchurReport check_strict_schur(const SymmetricFunction& f, int trials, std::uint64_t seed,
                                     int n) {
    if (!f.is_strictly_convex)
        throw std::invalid_argument("check_strict_schur: " + f.name + " is not strictly convex");
    if (n < 2) throw std::invalid_argument("check_strict_schur: n must be >= 2");
    Rng rng(seed);
    StrictSchurReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    std::vector<int> perm(static_cast<std::size_t>(n));
    while (report.trials < trials) {
        const Eigen::VectorXd v = random_normal(n, rng);
        const int k = 1 + static_cast<int>(rng() % 3);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < k; ++j) {
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int i = 0; i < n; ++i) u[i] += v[perm[std::size_t(i)]];
        }
        u /= static_cast<double>(k);
        Eigen::VectorXd us = u;
        Eigen::VectorXd vs = v;
        std::sort(us.data(), us.data() + n, std::greater<>());
        std::sort(vs.data(), vs.data() + n, std::greater<>());
        if ((us - vs).cwiseAbs().maxCoeff() <= 1e-9) {
            ++report.rejected;
            continue;
        }
        ++report.trials;
        const double margin = f(v) - f(u);
        report.min_margin = std::min(report.min_margin, margin);
        if (!(margin > 0.0)) ++report.violations;
    }
    if (trials <= 0) report.min_margin = 0.0;
    return report;
}

double condition_number(const Element& x) {
    const Eigen::VectorXd l = eigenvalue_map(x);
    const double lmin = l[l.size() - 1];
    if (!(lmin > 0.0)) throw std::domain_error("condition_number: minimum eigenvalue must be positive");
    return l[0] / lmin;
}

bool monotone_pairing_check(const Element& x, const Element& v, double tol) {
    if (x.algebra() != v.algebra())
        throw AlgebraMismatch("monotone_pairing_check: rank mismatch between x and v");
    const auto dec = spectral_decompose(x);
    const Eigen::Index n = dec.eigenvalues.size();
    Eigen::VectorXd beta(n);
    for (Eigen::Index i = 0; i < n; ++i) beta[i] = inner(v, dec.frame[std::size_t(i)]);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (dec.eigenvalues[i] > dec.eigenvalues[j] + tol && !(beta[i] > beta[j])) return false;
    return true;
}

}  // namespace eja::specfun
