#pragma once

#include <Eigen/Dense>

#include "amvlab/geometry.hpp"

namespace amvlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// multivariate polynomials (exact derivatives, recentered expansion)
// ---------------------------------------------------------------------------

struct Polynomial {
    int n = 1;
    // multi-index -> coefficient
    std::vector<std::pair<std::vector<int>, double>> terms;

    void validate() const {
        if (n < 1) throw rejected_input("Polynomial: dimension must be >= 1");
        for (const auto& [e, c] : terms) {
            if (static_cast<int>(e.size()) != n) throw rejected_input("Polynomial: exponent size mismatch");
            for (int k : e)
                if (k < 0) throw rejected_input("Polynomial: negative exponent");
            (void)c;
        }
    }

    double eval(cspan x) const {
        double v = 0.0;
        for (const auto& [e, c] : terms) {
            double t = c;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) t *= x[static_cast<std::size_t>(i)];
            v += t;
        }
        return v;
    }

    Polynomial derivative(int dim) const {
        Polynomial out;
        out.n = n;
        for (const auto& [e, c] : terms) {
            const int k = e[static_cast<std::size_t>(dim)];
            if (k == 0) continue;
            auto e2 = e;
            e2[static_cast<std::size_t>(dim)] = k - 1;
            out.terms.emplace_back(std::move(e2), c * k);
        }
        return out;
    }

    // expansion around c: returns q with q(v) = p(c + v)
    Polynomial shifted(cspan c) const {
        Polynomial out;
        out.n = n;
        std::vector<std::pair<std::vector<int>, double>> acc;
        for (const auto& [e, coef] : terms) {
            // expand prod_i (c_i + v_i)^{e_i}
            std::vector<std::pair<std::vector<int>, double>> cur{{std::vector<int>(static_cast<std::size_t>(n), 0), coef}};
            for (int i = 0; i < n; ++i) {
                const int ei = e[static_cast<std::size_t>(i)];
                if (ei == 0) continue;
                std::vector<std::pair<std::vector<int>, double>> next;
                // binomial coefficients for (c_i + v_i)^{ei}
                double binom = 1.0;
                for (int k = 0; k <= ei; ++k) {
                    const double w = binom * std::pow(c[static_cast<std::size_t>(i)], ei - k);
                    if (w != 0.0)
                        for (const auto& [me, mc] : cur) {
                            auto e2 = me;
                            e2[static_cast<std::size_t>(i)] += k;
                            next.emplace_back(std::move(e2), mc * w);
                        }
                    binom = binom * (ei - k) / (k + 1.0);
                }
                cur = std::move(next);
            }
            for (auto& t : cur) acc.push_back(std::move(t));
        }
        // merge duplicate exponents
        for (auto& [e, c] : acc) {
            bool merged = false;
            for (auto& [oe, oc] : out.terms)
                if (oe == e) {
                    oc += c;
                    merged = true;
                    break;
                }
            if (!merged) out.terms.emplace_back(std::move(e), c);
        }
        return out;
    }
};

inline Polynomial make_polynomial(int n, std::vector<std::pair<std::vector<int>, double>> terms) {
    Polynomial p;
    p.n = n;
    p.terms = std::move(terms);
    p.validate();
    return p;
}

// u(y) = ||y||_2^2
inline Polynomial squared_norm_polynomial(int n) {
    Polynomial p;
    p.n = n;
    for (int i = 0; i < n; ++i) {
        std::vector<int> e(static_cast<std::size_t>(n), 0);
        e[static_cast<std::size_t>(i)] = 2;
        p.terms.emplace_back(std::move(e), 1.0);
    }
    return p;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

enum class WeightKind { constant, exp_linear, power_alpha, separable, product };

// radial part f(rho) = rho^beta * sum_k coeffs[k] rho^k (coefficients >= 0)
struct RadialPart {
    double beta = 0.0;
    vec coeffs{1.0};

    void validate() const {
        if (beta < 0.0) throw rejected_input("RadialPart: beta must be >= 0");
        if (coeffs.empty()) throw rejected_input("RadialPart: empty coefficient list");
        for (double c : coeffs)
            if (c < 0.0) throw rejected_input("RadialPart: negative coefficient");
    }
    double eval(double rho) const {
        double v = poly1_eval(coeffs, rho);
        return std::pow(rho, beta) * v;
    }
    // integral over [0,R] of f(rho) rho^m
    double weighted_integral(int m, double R) const {
        double tot = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            const double p = beta + static_cast<double>(k) + m + 1.0;
            tot += coeffs[k] * std::pow(R, p) / p;
        }
        return tot;
    }
    bool is_pure_power() const {
        for (std::size_t k = 1; k < coeffs.size(); ++k)
            if (coeffs[k] != 0.0) return false;
        return true;
    }
};

// trigonometric-polynomial angular part g(t) = a0 + sum_m am cos(mt) + bm sin(mt)
struct AngularFourier {
    double a0 = 1.0;
    vec am{}, bm{};

    int max_harmonic() const { return static_cast<int>(std::max(am.size(), bm.size())); }
    double eval(double t) const {
        double v = a0;
        for (std::size_t m = 0; m < am.size(); ++m) v += am[m] * std::cos((static_cast<double>(m) + 1.0) * t);
        for (std::size_t m = 0; m < bm.size(); ++m) v += bm[m] * std::sin((static_cast<double>(m) + 1.0) * t);
        return v;
    }
    void validate() const {
        // nonnegativity checked by dense sampling of the circle
        const int samples = 4096;
        for (int k = 0; k < samples; ++k)
            if (eval(2.0 * pi * k / samples) < -1e-12)
                throw rejected_input("AngularFourier: angular part must be nonnegative");
    }
    bool is_even() const {
        for (std::size_t m = 0; m < am.size(); m += 2)
            if (am[m] != 0.0) return false;  // odd harmonics sit at even indices (m+1 odd)
        for (std::size_t m = 0; m < bm.size(); m += 2)
            if (bm[m] != 0.0) return false;
        return true;
    }
    bool is_constant() const {
        for (double c : am)
            if (c != 0.0) return false;
        for (double c : bm)
            if (c != 0.0) return false;
        return true;
    }
    // integral over the circle against cos^a sin^b, exact for trigonometric
    // polynomials (periodic trapezoid rule with enough nodes)
    double moment(int cos_pow, int sin_pow) const {
        const int degree = cos_pow + sin_pow + max_harmonic();
        const int nodes = std::max(64, 4 * (degree + 1));
        double s = 0.0;
        for (int k = 0; k < nodes; ++k) {
            const double t = 2.0 * pi * k / nodes;
            s += std::pow(std::cos(t), cos_pow) * std::pow(std::sin(t), sin_pow) * eval(t);
        }
        return s * 2.0 * pi / nodes;
    }
};

struct WeightDescriptor {
    WeightKind kind = WeightKind::constant;
    double c = 1.0;                            // constant
    vec a{};                                   // exp_linear direction
    double alpha = 1.0;                        // power_alpha exponent
    RadialPart radial{};                       // separable radial part
    AngularFourier angular{};                  // separable angular part (n = 2)
    std::vector<WeightDescriptor> factors{};   // product

    void validate(int n) const {
        switch (kind) {
            case WeightKind::constant:
                if (!(c > 0.0)) throw rejected_input("constant weight must be positive");
                break;
            case WeightKind::exp_linear:
                if (static_cast<int>(a.size()) != n) throw rejected_input("exp_linear: direction size mismatch");
                break;
            case WeightKind::power_alpha:
                if (!(alpha > 0.0)) throw rejected_input("power_alpha: alpha must be positive");
                break;
            case WeightKind::separable:
                radial.validate();
                angular.validate();
                if (n != 2 && !angular.is_constant())
                    throw rejected_input("separable: general angular parts require n = 2");
                break;
            case WeightKind::product:
                if (factors.empty()) throw rejected_input("product weight: no factors");
                for (const auto& f : factors) f.validate(n);
                break;
        }
    }

    double eval(cspan x) const {
        switch (kind) {
            case WeightKind::constant: return c;
            case WeightKind::exp_linear: {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i];
                return std::exp(s);
            }
            case WeightKind::power_alpha: {
                double s = 0.0;
                for (double xi : x) s += xi * xi;
                return std::pow(s, 0.5 * alpha);
            }
            case WeightKind::separable: {
                double s = 0.0;
                for (double xi : x) s += xi * xi;
                const double rho = std::sqrt(s);
                if (rho == 0.0) return radial.beta > 0.0 ? 0.0 : radial.eval(0.0) * angular.a0;
                const double t = x.size() == 2 ? std::atan2(x[1], x[0]) : 0.0;
                return radial.eval(rho) * angular.eval(t);
            }
            case WeightKind::product: {
                double v = 1.0;
                for (const auto& f : factors) v *= f.eval(x);
                return v;
            }
        }
        return 0.0;
    }

    bool differentiable_at(cspan x) const {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        const bool at_origin = s == 0.0;
        switch (kind) {
            case WeightKind::constant: return true;
            case WeightKind::exp_linear: return true;
            case WeightKind::power_alpha: return !at_origin || alpha >= 2.0;
            case WeightKind::separable: return !at_origin;
            case WeightKind::product:
                for (const auto& f : factors)
                    if (!f.differentiable_at(x)) return false;
                return true;
        }
        return false;
    }

    Vector gradient(cspan x) const {
        const int n = static_cast<int>(x.size());
        if (!differentiable_at(x)) throw rejected_input("weight gradient requested at a singular point");
        Vector g = Vector::Zero(n);
        switch (kind) {
            case WeightKind::constant: return g;
            case WeightKind::exp_linear: {
                const double w = eval(x);
                for (int i = 0; i < n; ++i) g[i] = a[static_cast<std::size_t>(i)] * w;
                return g;
            }
            case WeightKind::power_alpha: {
                double s = 0.0;
                for (double xi : x) s += xi * xi;
                if (s == 0.0) return g;  // alpha >= 2
                const double f = alpha * std::pow(s, 0.5 * alpha - 1.0);
                for (int i = 0; i < n; ++i) g[i] = f * x[static_cast<std::size_t>(i)];
                return g;
            }
            case WeightKind::separable: {
                if (n != 2 && !angular.is_constant())
                    throw rejected_input("separable gradient supported in n = 2 only");
                double s = 0.0;
                for (double xi : x) s += xi * xi;
                const double rho = std::sqrt(s);
                // d/drho of f(rho) = rho^{beta-1} (beta*poly + rho*poly')
                double pv = poly1_eval(radial.coeffs, rho), pd = 0.0;
                for (std::size_t k = 1; k < radial.coeffs.size(); ++k)
                    pd += static_cast<double>(k) * radial.coeffs[k] * std::pow(rho, static_cast<double>(k) - 1.0);
                const double fr = radial.eval(rho);
                const double dfr = std::pow(rho, radial.beta - 1.0) * (radial.beta * pv) + std::pow(rho, radial.beta) * pd;
                if (n == 2) {
                    const double t = std::atan2(x[1], x[0]);
                    const double gv = angular.eval(t);
                    double gd = 0.0;
                    for (std::size_t m = 0; m < angular.am.size(); ++m)
                        gd -= angular.am[m] * (static_cast<double>(m) + 1.0) * std::sin((static_cast<double>(m) + 1.0) * t);
                    for (std::size_t m = 0; m < angular.bm.size(); ++m)
                        gd += angular.bm[m] * (static_cast<double>(m) + 1.0) * std::cos((static_cast<double>(m) + 1.0) * t);
                    g[0] = dfr * gv * (x[0] / rho) - fr * gd * x[1] / (rho * rho);
                    g[1] = dfr * gv * (x[1] / rho) + fr * gd * x[0] / (rho * rho);
                } else {
                    const double gv = angular.a0;
                    for (int i = 0; i < n; ++i) g[i] = dfr * gv * x[static_cast<std::size_t>(i)] / rho;
                }
                return g;
            }
            case WeightKind::product: {
                // product rule over factor values
                vec vals(factors.size());
                double total = 1.0;
                for (std::size_t j = 0; j < factors.size(); ++j) {
                    vals[j] = factors[j].eval(x);
                    total *= vals[j];
                }
                for (std::size_t j = 0; j < factors.size(); ++j) {
                    Vector gj = factors[j].gradient(x);
                    double rest = 1.0;
                    for (std::size_t l = 0; l < factors.size(); ++l)
                        if (l != j) rest *= vals[l];
                    g += rest * gj;
                }
                (void)total;
                return g;
            }
        }
        return g;
    }

    Matrix hessian(cspan x) const {
        const int n = static_cast<int>(x.size());
        switch (kind) {
            case WeightKind::constant: return Matrix::Zero(n, n);
            case WeightKind::exp_linear: {
                const double w = eval(x);
                Matrix h(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        h(i, j) = a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)] * w;
                return h;
            }
            case WeightKind::power_alpha: {
                double s = 0.0;
                for (double xi : x) s += xi * xi;
                if (s == 0.0) {
                    if (alpha == 2.0) return 2.0 * Matrix::Identity(n, n);
                    if (alpha > 2.0) return Matrix::Zero(n, n);
                    throw rejected_input("power_alpha hessian singular at the origin");
                }
                const double f1 = alpha * std::pow(s, 0.5 * alpha - 1.0);
                const double f2 = alpha * (alpha - 2.0) * std::pow(s, 0.5 * alpha - 2.0);
                Matrix h = f1 * Matrix::Identity(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        h(i, j) += f2 * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
                return h;
            }
            default:
                throw rejected_input("weight hessian not available for this catalog entry");
        }
    }

    bool is_even() const {
        switch (kind) {
            case WeightKind::constant: return true;
            case WeightKind::exp_linear:
                for (double ai : a)
                    if (ai != 0.0) return false;
                return true;
            case WeightKind::power_alpha: return true;
            case WeightKind::separable: return angular.is_even();
            case WeightKind::product:
                for (const auto& f : factors)
                    if (!f.is_even()) return false;
                return true;
        }
        return false;
    }

    bool vanishes_at_origin() const {
        switch (kind) {
            case WeightKind::constant: return false;
            case WeightKind::exp_linear: return false;
            case WeightKind::power_alpha: return true;
            case WeightKind::separable: return radial.beta > 0.0 || radial.coeffs[0] == 0.0;
            case WeightKind::product:
                for (const auto& f : factors)
                    if (f.vanishes_at_origin()) return true;
                return false;
        }
        return false;
    }

    // analytic maximizer of sup_{||x||_p < r} |w(x) - w(-x)| where the catalog
    // provides one (exponential weights); the dual-norm direction attains it
    std::optional<double> evenness_sup_exact(const NormDescriptor& nd, double r) const {
        if (is_even()) return 0.0;
        if (kind == WeightKind::exp_linear) {
            double dual;
            if (nd.is_max_norm()) {
                dual = 0.0;
                for (double ai : a) dual += std::abs(ai);
            } else if (nd.p == 1.0) {
                dual = 0.0;
                for (double ai : a) dual = std::max(dual, std::abs(ai));
            } else {
                const double q = nd.p / (nd.p - 1.0);
                double s = 0.0;
                for (double ai : a) s += std::pow(std::abs(ai), q);
                dual = std::pow(s, 1.0 / q);
            }
            return 2.0 * std::sinh(r * dual);
        }
        return std::nullopt;
    }
};

inline WeightDescriptor constant_weight(double c = 1.0) {
    WeightDescriptor w;
    w.kind = WeightKind::constant;
    w.c = c;
    return w;
}

inline WeightDescriptor exp_linear_weight(vec a) {
    WeightDescriptor w;
    w.kind = WeightKind::exp_linear;
    w.a = std::move(a);
    return w;
}

inline WeightDescriptor power_alpha_weight(double alpha) {
    WeightDescriptor w;
    w.kind = WeightKind::power_alpha;
    w.alpha = alpha;
    return w;
}

inline WeightDescriptor separable_weight(RadialPart f, AngularFourier g) {
    WeightDescriptor w;
    w.kind = WeightKind::separable;
    w.radial = std::move(f);
    w.angular = std::move(g);
    return w;
}

// ---------------------------------------------------------------------------
// scalar fields
// ---------------------------------------------------------------------------

// compactly supported polynomial bump: product over coordinates of
// (1 - s^2)^4 (1 + slope*s) with s = (x - center)/halfwidth, zero outside
struct BumpSpec {
    vec center, halfwidth, slope;

    void validate() const {
        if (center.empty() || center.size() != halfwidth.size() || center.size() != slope.size())
            throw rejected_input("BumpSpec: inconsistent sizes");
        for (double h : halfwidth)
            if (!(h > 0.0)) throw rejected_input("BumpSpec: halfwidth must be positive");
        for (double b : slope)
            if (std::abs(b) > 1.0) throw rejected_input("BumpSpec: |slope| must be <= 1");
    }

    static double factor(double s, double beta) {
        const double q = 1.0 - s * s;
        return q * q * q * q * (1.0 + beta * s);
    }
    static double factor_d1(double s, double beta) {
        const double q = 1.0 - s * s;
        return -8.0 * s * q * q * q * (1.0 + beta * s) + beta * q * q * q * q;
    }
    static double factor_d2(double s, double beta) {
        const double q = 1.0 - s * s;
        return (-8.0 * q * q * q + 48.0 * s * s * q * q) * (1.0 + beta * s) - 16.0 * beta * s * q * q * q;
    }
};

enum class FieldKind { polynomial, sign_function, bump, weight };

struct ScalarField {
    FieldKind kind = FieldKind::polynomial;
    Polynomial poly{};
    BumpSpec bump{};
    WeightDescriptor w{};
    int n = 1;

    void validate() const {
        switch (kind) {
            case FieldKind::polynomial: poly.validate(); break;
            case FieldKind::sign_function:
                if (n != 1) throw rejected_input("sign field is one-dimensional");
                break;
            case FieldKind::bump:
                bump.validate();
                break;
            case FieldKind::weight: w.validate(n); break;
        }
    }

    int dimension() const {
        switch (kind) {
            case FieldKind::polynomial: return poly.n;
            case FieldKind::sign_function: return 1;
            case FieldKind::bump: return static_cast<int>(bump.center.size());
            case FieldKind::weight: return n;
        }
        return n;
    }

    bool continuous_at(cspan x) const {
        if (kind == FieldKind::sign_function) return x[0] != 0.0;
        return true;
    }

    double value(cspan x) const {
        switch (kind) {
            case FieldKind::polynomial: return poly.eval(x);
            case FieldKind::sign_function: return x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0);
            case FieldKind::bump: {
                double v = 1.0;
                for (std::size_t i = 0; i < bump.center.size(); ++i) {
                    const double s = (x[i] - bump.center[i]) / bump.halfwidth[i];
                    if (std::abs(s) >= 1.0) return 0.0;
                    v *= BumpSpec::factor(s, bump.slope[i]);
                }
                return v;
            }
            case FieldKind::weight: return w.eval(x);
        }
        return 0.0;
    }

    Vector gradient(cspan x) const {
        const int dim = dimension();
        switch (kind) {
            case FieldKind::polynomial: {
                Vector g(dim);
                for (int i = 0; i < dim; ++i) g[i] = poly.derivative(i).eval(x);
                return g;
            }
            case FieldKind::sign_function:
                if (x[0] == 0.0) throw rejected_input("sign field gradient requested at the discontinuity");
                return Vector::Zero(1);
            case FieldKind::bump: {
                Vector g(dim);
                vec s(static_cast<std::size_t>(dim)), f(static_cast<std::size_t>(dim)), fd(static_cast<std::size_t>(dim));
                for (int i = 0; i < dim; ++i) {
                    s[static_cast<std::size_t>(i)] = (x[static_cast<std::size_t>(i)] - bump.center[static_cast<std::size_t>(i)]) / bump.halfwidth[static_cast<std::size_t>(i)];
                    if (std::abs(s[static_cast<std::size_t>(i)]) >= 1.0) return Vector::Zero(dim);
                    f[static_cast<std::size_t>(i)] = BumpSpec::factor(s[static_cast<std::size_t>(i)], bump.slope[static_cast<std::size_t>(i)]);
                    fd[static_cast<std::size_t>(i)] = BumpSpec::factor_d1(s[static_cast<std::size_t>(i)], bump.slope[static_cast<std::size_t>(i)]);
                }
                for (int i = 0; i < dim; ++i) {
                    double v = fd[static_cast<std::size_t>(i)] / bump.halfwidth[static_cast<std::size_t>(i)];
                    for (int j = 0; j < dim; ++j)
                        if (j != i) v *= f[static_cast<std::size_t>(j)];
                    g[i] = v;
                }
                return g;
            }
            case FieldKind::weight: return w.gradient(x);
        }
        return Vector::Zero(dim);
    }

    Matrix hessian(cspan x) const {
        const int dim = dimension();
        switch (kind) {
            case FieldKind::polynomial: {
                Matrix h(dim, dim);
                for (int i = 0; i < dim; ++i) {
                    const Polynomial di = poly.derivative(i);
                    for (int j = 0; j <= i; ++j) {
                        h(i, j) = di.derivative(j).eval(x);
                        h(j, i) = h(i, j);
                    }
                }
                return h;
            }
            case FieldKind::sign_function:
                if (x[0] == 0.0) throw rejected_input("sign field hessian requested at the discontinuity");
                return Matrix::Zero(1, 1);
            case FieldKind::bump: {
                Matrix h(dim, dim);
                vec s(static_cast<std::size_t>(dim)), f(static_cast<std::size_t>(dim)), f1(static_cast<std::size_t>(dim)), f2(static_cast<std::size_t>(dim));
                for (int i = 0; i < dim; ++i) {
                    s[static_cast<std::size_t>(i)] = (x[static_cast<std::size_t>(i)] - bump.center[static_cast<std::size_t>(i)]) / bump.halfwidth[static_cast<std::size_t>(i)];
                    if (std::abs(s[static_cast<std::size_t>(i)]) >= 1.0) return Matrix::Zero(dim, dim);
                    f[static_cast<std::size_t>(i)] = BumpSpec::factor(s[static_cast<std::size_t>(i)], bump.slope[static_cast<std::size_t>(i)]);
                    f1[static_cast<std::size_t>(i)] = BumpSpec::factor_d1(s[static_cast<std::size_t>(i)], bump.slope[static_cast<std::size_t>(i)]);
                    f2[static_cast<std::size_t>(i)] = BumpSpec::factor_d2(s[static_cast<std::size_t>(i)], bump.slope[static_cast<std::size_t>(i)]);
                }
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j <= i; ++j) {
                        double v = 1.0;
                        for (int l = 0; l < dim; ++l) {
                            const auto ls = static_cast<std::size_t>(l);
                            if (l == i && l == j)
                                v *= f2[ls] / (bump.halfwidth[ls] * bump.halfwidth[ls]);
                            else if (l == i || l == j)
                                v *= f1[ls] / bump.halfwidth[ls];
                            else
                                v *= f[ls];
                        }
                        h(i, j) = v;
                        h(j, i) = v;
                    }
                return h;
            }
            case FieldKind::weight: return w.hessian(x);
        }
        return Matrix::Zero(dim, dim);
    }
};

inline ScalarField polynomial_field(Polynomial p) {
    ScalarField f;
    f.kind = FieldKind::polynomial;
    f.n = p.n;
    f.poly = std::move(p);
    return f;
}

inline ScalarField sign_field() {
    ScalarField f;
    f.kind = FieldKind::sign_function;
    f.n = 1;
    return f;
}

inline ScalarField bump_field(BumpSpec b) {
    b.validate();
    ScalarField f;
    f.kind = FieldKind::bump;
    f.n = static_cast<int>(b.center.size());
    f.bump = std::move(b);
    return f;
}

inline ScalarField weight_field(WeightDescriptor w, int n) {
    ScalarField f;
    f.kind = FieldKind::weight;
    f.n = n;
    f.w = std::move(w);
    return f;
}

// convenience accessors used throughout the operator layer
inline double eval_field(const ScalarField& f, cspan x) { return f.value(x); }
inline Vector grad_field(const ScalarField& f, cspan x) { return f.gradient(x); }
inline Matrix hessian_field(const ScalarField& f, cspan x) { return f.hessian(x); }

// drifted Laplacian  Delta u + <grad ln w, grad u>  at a point with w > 0
inline double weighted_laplacian(const ScalarField& u, const WeightDescriptor& w, cspan x) {
    const double wx = w.eval(x);
    if (!(wx > 0.0)) throw rejected_input("weighted_laplacian: weight must be positive at x");
    const Matrix h = u.hessian(x);
    const Vector gu = u.gradient(x);
    const Vector gw = w.gradient(x);
    return h.trace() + gw.dot(gu) / wx;
}

}  // namespace amvlab
