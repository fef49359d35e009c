#pragma once

#include <functional>
#include <optional>

#include "amvlab/fields.hpp"
#include "amvlab/sampling.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// metric measure space descriptor
// ---------------------------------------------------------------------------

enum class MeasureKind { weighted_lebesgue, model };

struct SpaceDescriptor {
    int n = 1;
    DistanceDescriptor distance{};
    MeasureKind measure_kind = MeasureKind::weighted_lebesgue;
    WeightDescriptor weight = constant_weight();

    void validate() const {
        distance.validate();
        if (distance.dimension() != n) throw rejected_input("SpaceDescriptor: dimension mismatch");
        if (measure_kind == MeasureKind::weighted_lebesgue)
            weight.validate(n);
        else if (distance.kind != DistanceKind::model_space)
            throw rejected_input("SpaceDescriptor: model measure requires a model distance");
    }

    static SpaceDescriptor euclidean_lebesgue(int n) {
        SpaceDescriptor s;
        s.n = n;
        s.distance.kind = DistanceKind::norm_induced;
        s.distance.norm = NormDescriptor{n, 2.0};
        return s;
    }

    static SpaceDescriptor norm_weighted(NormDescriptor nd, WeightDescriptor w) {
        SpaceDescriptor s;
        s.n = nd.n;
        s.distance.kind = DistanceKind::norm_induced;
        s.distance.norm = nd;
        s.weight = std::move(w);
        return s;
    }

    static SpaceDescriptor model(ModelKind kind, int n) {
        SpaceDescriptor s;
        s.n = n;
        s.distance.kind = DistanceKind::model_space;
        s.distance.model = ModelVolumeOracle{kind, n};
        s.measure_kind = MeasureKind::model;
        return s;
    }
};

// ---------------------------------------------------------------------------
// schemes and estimates
// ---------------------------------------------------------------------------

enum class SchemeKind { exact_polar, qmc, mc };

struct QuadratureScheme {
    SchemeKind kind = SchemeKind::qmc;
    std::uint64_t count = 1ULL << 16;   // box proposals for the outer integral
    std::uint64_t seed = 0;
    double tolerance = 0.0;             // adaptive doubling target (absolute); 0 = single pass
    std::uint64_t inner_count = 2048;   // proposals for nested ball measures

    static constexpr std::uint64_t max_count = 1ULL << 22;

    static QuadratureScheme exact() { return {SchemeKind::exact_polar, 0, 0, 0.0, 0}; }
    static QuadratureScheme qmc(std::uint64_t count = 1ULL << 16, std::uint64_t seed = 0, double tol = 0.0) {
        return {SchemeKind::qmc, count, seed, tol, 2048};
    }
    static QuadratureScheme mc(std::uint64_t count = 1ULL << 16, std::uint64_t seed = 0, double tol = 0.0) {
        return {SchemeKind::mc, count, seed, tol, 2048};
    }
};

struct Estimate {
    double value = 0.0;
    double error_bound = 0.0;
    SchemeKind scheme = SchemeKind::exact_polar;
};

inline constexpr double measure_underflow_guard = 1e-280;

// ---------------------------------------------------------------------------
// exact catalog: closed-form ball measures and ball integrals
// ---------------------------------------------------------------------------

namespace exact {

// integral over { ||y||_p < 1 } of prod |y_i|^{beta_i}; zero unless all beta_i even
inline double norm_ball_monomial_integral(const NormDescriptor& nd, std::span<const int> beta) {
    int total = 0;
    for (int b : beta) {
        if (b % 2 != 0) return 0.0;
        total += b;
    }
    if (nd.is_max_norm()) {
        double v = 1.0;
        for (int b : beta) v *= 2.0 / (b + 1.0);
        return v;
    }
    double log_num = 0.0;
    for (int b : beta) log_num += std::lgamma((b + 1.0) / nd.p);
    const double log_den = std::lgamma(1.0 + (nd.n + total) / nd.p);
    return std::pow(2.0 / nd.p, nd.n) * std::exp(log_num - log_den);
}

// integral over B_r(center) (norm ball) of the polynomial u against Lebesgue
inline double norm_ball_polynomial_integral(const NormDescriptor& nd, const Polynomial& u,
                                            cspan center, double r) {
    const Polynomial q = u.shifted(center);
    double total = 0.0;
    for (const auto& [e, c] : q.terms) {
        if (c == 0.0) continue;
        int deg = 0;
        for (int k : e) deg += k;
        const double m = norm_ball_monomial_integral(nd, e);
        if (m != 0.0) total += c * m * std::pow(r, nd.n + deg);
    }
    return total;
}

// integral over the Euclidean B_r(0) of y^beta |y|^alpha
inline double power_monomial_integral(int n, double alpha, std::span<const int> beta, double r) {
    int deg = 0;
    for (int b : beta) {
        if (b % 2 != 0) return 0.0;
        deg += b;
    }
    const double s = sphere_monomial_integral(beta);
    const double p = n + deg + alpha;
    return s * std::pow(r, p) / p;
}

// 1-d piecewise-exact integration: integral over the interval of
// u(t) * w(t) dt for the 1-d catalog (u polynomial / sign / bump,
// w constant / exp-linear / power-alpha)
struct Segment1D {
    double lo, hi;
};

inline void push_breakpoint(vec& bp, double t, double lo, double hi) {
    if (t > lo && t < hi) bp.push_back(t);
}

inline double integrate_poly_weight_1d(cspan coeffs, const WeightDescriptor& w, double lo, double hi) {
    // integral over [lo,hi] of (sum coeffs[k] t^k) * w(t)
    switch (w.kind) {
        case WeightKind::constant: return w.c * poly1_integral(coeffs, lo, hi);
        case WeightKind::exp_linear: {
            const double s = w.a[0];
            double tot = 0.0;
            for (std::size_t k = 0; k < coeffs.size(); ++k)
                if (coeffs[k] != 0.0) tot += coeffs[k] * poly_exp_integral(static_cast<int>(k), s, lo, hi);
            return tot;
        }
        case WeightKind::power_alpha: {
            double tot = 0.0;
            for (std::size_t k = 0; k < coeffs.size(); ++k)
                if (coeffs[k] != 0.0) tot += coeffs[k] * poly_abs_power_integral(static_cast<int>(k), w.alpha, lo, hi);
            return tot;
        }
        default: throw rejected_input("integrate_poly_weight_1d: weight not in 1-d catalog");
    }
}

// expand one bump factor (1-s^2)^4 (1+beta s), s = (t-c)/h, into coefficients in t
inline vec bump_factor_coeffs_in_t(double c, double h, double beta) {
    // first in s: (1-s^2)^4 = 1 -4s^2 +6s^4 -4s^6 + s^8
    vec ps{1, 0, -4, 0, 6, 0, -4, 0, 1};
    vec full(ps.size() + 1, 0.0);
    for (std::size_t k = 0; k < ps.size(); ++k) {
        full[k] += ps[k];
        full[k + 1] += ps[k] * beta;
    }
    // substitute s = (t - c)/h: poly in t with degree 9
    vec out(full.size(), 0.0);
    // build via Horner on (t-c)/h: repeatedly multiply by (t-c)/h
    vec acc{full.back()};
    for (std::size_t k = full.size() - 1; k-- > 0;) {
        // acc = acc * (t-c)/h + full[k]
        vec next(acc.size() + 1, 0.0);
        for (std::size_t j = 0; j < acc.size(); ++j) {
            next[j + 1] += acc[j] / h;
            next[j] -= acc[j] * c / h;
        }
        next[0] += full[k];
        acc = std::move(next);
    }
    return acc;
}

}  // namespace exact

// forward declaration (definitions below)
inline std::optional<double> exact_ball_measure(const SpaceDescriptor& space, cspan x, double r);

namespace detail {

inline bool is_euclidean_norm(const DistanceDescriptor& d) {
    return d.kind == DistanceKind::norm_induced && d.norm.p == 2.0;
}

inline bool is_origin(cspan x) {
    for (double xi : x)
        if (xi != 0.0) return false;
    return true;
}

inline double sq_norm(cspan x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return s;
}

// 1-d ball of the space as an interval
inline std::optional<Interval> ball_interval_1d(const SpaceDescriptor& space, cspan x, double r) {
    if (space.n != 1) return std::nullopt;
    if (space.distance.kind == DistanceKind::norm_induced) return Interval{x[0] - r, x[0] + r};
    if (space.distance.kind == DistanceKind::asymmetric_half_line) return asymmetric_half_line_ball(x[0], r);
    return std::nullopt;
}

// exact integral over B_r(x) of u(t) w(t) dt for the 1-d catalog
inline std::optional<double> exact_ball_integral_1d(const SpaceDescriptor& space, const ScalarField& u,
                                                    cspan x, double r) {
    const auto iv = ball_interval_1d(space, x, r);
    if (!iv) return std::nullopt;
    const WeightDescriptor& w = space.weight;
    if (w.kind != WeightKind::constant && w.kind != WeightKind::exp_linear && w.kind != WeightKind::power_alpha)
        return std::nullopt;
    if (u.kind == FieldKind::weight) return std::nullopt;

    vec bps{iv->lo, iv->hi};
    if (w.kind == WeightKind::power_alpha || u.kind == FieldKind::sign_function)
        exact::push_breakpoint(bps, 0.0, iv->lo, iv->hi);
    if (u.kind == FieldKind::bump) {
        exact::push_breakpoint(bps, u.bump.center[0] - u.bump.halfwidth[0], iv->lo, iv->hi);
        exact::push_breakpoint(bps, u.bump.center[0] + u.bump.halfwidth[0], iv->lo, iv->hi);
    }
    std::sort(bps.begin(), bps.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
        const double lo = bps[k], hi = bps[k + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        vec coeffs;
        switch (u.kind) {
            case FieldKind::polynomial: {
                coeffs.assign(16, 0.0);
                for (const auto& [e, c] : u.poly.terms) coeffs[static_cast<std::size_t>(e[0])] += c;
                break;
            }
            case FieldKind::sign_function: coeffs = {mid > 0.0 ? 1.0 : -1.0}; break;
            case FieldKind::bump: {
                const double s = (mid - u.bump.center[0]) / u.bump.halfwidth[0];
                if (std::abs(s) >= 1.0) continue;  // outside the support
                coeffs = exact::bump_factor_coeffs_in_t(u.bump.center[0], u.bump.halfwidth[0], u.bump.slope[0]);
                break;
            }
            default: return std::nullopt;
        }
        total += exact::integrate_poly_weight_1d(coeffs, w, lo, hi);
    }
    return total;
}

}  // namespace detail

// exact mu(B_r(x)) where the catalog provides it
inline std::optional<double> exact_ball_measure(const SpaceDescriptor& space, cspan x, double r) {
    space.validate();
    if (!(r > 0.0)) throw rejected_input("exact_ball_measure: radius must be positive");
    if (space.measure_kind == MeasureKind::model) return space.distance.model.ball_volume(r);

    const WeightDescriptor& w = space.weight;
    const DistanceDescriptor& d = space.distance;
    const int n = space.n;

    // one-dimensional catalog: everything reduces to interval integrals
    if (n == 1 && (d.kind == DistanceKind::norm_induced || d.kind == DistanceKind::asymmetric_half_line)) {
        if (w.kind == WeightKind::constant || w.kind == WeightKind::exp_linear || w.kind == WeightKind::power_alpha) {
            Polynomial one;
            one.n = 1;
            one.terms = {{{0}, 1.0}};
            return detail::exact_ball_integral_1d(space, polynomial_field(one), x, r);
        }
        return std::nullopt;
    }

    if (d.kind != DistanceKind::norm_induced) return std::nullopt;

    // constant weight on any norm ball
    if (w.kind == WeightKind::constant) return w.c * unit_ball_volume(d.norm) * std::pow(r, n);

    if (!detail::is_euclidean_norm(d)) return std::nullopt;

    if (w.kind == WeightKind::power_alpha) {
        if (w.alpha == 2.0) {
            // int_{B_r(x)} |y|^2 dy = omega_n r^n (|x|^2 + n r^2/(n+2))
            return omega_q(n) * std::pow(r, n) * (detail::sq_norm(x) + n * r * r / (n + 2.0));
        }
        if (detail::is_origin(x)) {
            const double p = n + w.alpha;
            return n * omega_q(n) * std::pow(r, p) / p;
        }
        return std::nullopt;
    }

    if (w.kind == WeightKind::separable && detail::is_origin(x)) {
        const double radial = w.radial.weighted_integral(n - 1, r);
        const double ang = (n == 2) ? w.angular.moment(0, 0) : w.angular.a0 * n * omega_q(n);
        return radial * ang;
    }

    return std::nullopt;
}

// exact integral over B_r(x) of u dmu where the catalog provides it
inline std::optional<double> exact_ball_integral(const SpaceDescriptor& space, const ScalarField& u,
                                                 cspan x, double r) {
    space.validate();
    if (space.measure_kind == MeasureKind::model) return std::nullopt;
    const WeightDescriptor& w = space.weight;
    const DistanceDescriptor& d = space.distance;
    const int n = space.n;

    if (n == 1) return detail::exact_ball_integral_1d(space, u, x, r);
    if (d.kind != DistanceKind::norm_induced) return std::nullopt;
    if (u.kind != FieldKind::polynomial) return std::nullopt;

    if (w.kind == WeightKind::constant)
        return w.c * exact::norm_ball_polynomial_integral(d.norm, u.poly, x, r);

    if (!detail::is_euclidean_norm(d)) return std::nullopt;

    if (w.kind == WeightKind::power_alpha && detail::is_origin(x)) {
        double total = 0.0;
        for (const auto& [e, c] : u.poly.terms)
            if (c != 0.0) total += c * exact::power_monomial_integral(n, w.alpha, e, r);
        return total;
    }

    if (w.kind == WeightKind::separable && detail::is_origin(x) && n == 2) {
        double total = 0.0;
        for (const auto& [e, c] : u.poly.terms) {
            if (c == 0.0) continue;
            const int deg = e[0] + e[1];
            const double radial = w.radial.weighted_integral(1 + deg, r);
            const double ang = w.angular.moment(e[0], e[1]);
            total += c * radial * ang;
        }
        return total;
    }

    return std::nullopt;
}

// exact ratio mu(B_r(x))/mu(B_r(y)) as a function of the two centers, where
// the catalog provides it (this is what the symmetrized kernel needs)
inline std::optional<std::function<double(cspan, cspan)>> exact_measure_ratio(const SpaceDescriptor& space,
                                                                              double r) {
    if (space.measure_kind == MeasureKind::model)
        return std::function<double(cspan, cspan)>([](cspan, cspan) { return 1.0; });
    const WeightDescriptor& w = space.weight;
    if (space.distance.kind != DistanceKind::norm_induced) return std::nullopt;
    if (w.kind == WeightKind::constant)
        return std::function<double(cspan, cspan)>([](cspan, cspan) { return 1.0; });
    if (w.kind == WeightKind::exp_linear) {
        const vec a = w.a;
        return std::function<double(cspan, cspan)>([a](cspan x, cspan y) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * (x[i] - y[i]);
            return std::exp(s);
        });
    }
    if (w.kind == WeightKind::power_alpha && w.alpha == 2.0 && detail::is_euclidean_norm(space.distance)) {
        const double c = space.n * r * r / (space.n + 2.0);
        return std::function<double(cspan, cspan)>([c](cspan x, cspan y) {
            return (detail::sq_norm(x) + c) / (detail::sq_norm(y) + c);
        });
    }
    if (space.n == 1) {
        if (auto mx = exact_ball_measure(space, vec{0.0}, r); mx.has_value()) {
            const SpaceDescriptor s = space;
            return std::function<double(cspan, cspan)>([s, r](cspan x, cspan y) {
                return *exact_ball_measure(s, x, r) / *exact_ball_measure(s, y, r);
            });
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// quasi / pseudo Monte Carlo over balls
// ---------------------------------------------------------------------------

namespace detail {

struct HalfSums {
    double sum[2] = {0.0, 0.0};
    void add(std::uint8_t h, double v) { sum[h] += v; }
    double total() const { return sum[0] + sum[1]; }
};

// nested ball-measure evaluator: exact where possible, otherwise a shared
// unit cloud re-weighted per center (norm balls), otherwise per-center clouds
class InnerMeasure {
  public:
    InnerMeasure(const SpaceDescriptor& space, double r, const QuadratureScheme& scheme)
        : space_(space), r_(r), scheme_(scheme) {
        if (space.measure_kind == MeasureKind::model) {
            const double v = space.distance.model.ball_volume(r);
            exact_fn_ = [v](cspan) { return v; };
            return;
        }
        if (space.weight.kind == WeightKind::constant && space.distance.kind == DistanceKind::norm_induced) {
            const double v = space.weight.c * unit_ball_volume(space.distance.norm) * std::pow(r, space.n);
            exact_fn_ = [v](cspan) { return v; };
            return;
        }
        if (space.weight.kind == WeightKind::power_alpha && space.weight.alpha == 2.0 &&
            is_euclidean_norm(space.distance)) {
            const double c = space.n * r * r / (space.n + 2.0);
            const double pref = omega_q(space.n) * std::pow(r, space.n);
            exact_fn_ = [c, pref](cspan y) { return pref * (sq_norm(y) + c); };
            return;
        }
        if (space.n == 1 && (space.distance.kind == DistanceKind::norm_induced ||
                             space.distance.kind == DistanceKind::asymmetric_half_line)) {
            if (space.weight.kind == WeightKind::exp_linear || space.weight.kind == WeightKind::power_alpha) {
                const SpaceDescriptor s = space;
                const double rr = r;
                exact_fn_ = [s, rr](cspan y) { return exact_ball_measure(s, y, rr).value(); };
                return;
            }
        }
        if (space.distance.kind == DistanceKind::norm_induced) {
            // shared unit cloud, offsets scaled by r and shifted per center
            DistanceDescriptor unit = space.distance;
            vec zero(static_cast<std::size_t>(space.n), 0.0);
            const DriverKind drv = scheme.kind == SchemeKind::mc ? DriverKind::pseudo_random : DriverKind::quasi_random;
            unit_cloud_ = make_ball_cloud(unit, zero, 1.0, std::max<std::uint64_t>(scheme.inner_count, 64),
                                          mix_seed(scheme.seed, hash_tag("inner-cloud")), drv);
            if (unit_cloud_.size() == 0) throw evaluation_failure("InnerMeasure: empty inner cloud");
        }
    }

    bool exact() const { return static_cast<bool>(exact_fn_); }

    double operator()(cspan y, std::uint64_t sample_index) const {
        if (exact_fn_) return exact_fn_(y);
        if (!unit_cloud_.pts.empty()) {
            const int n = space_.n;
            double s = 0.0;
            vec z(static_cast<std::size_t>(n));
            for (std::size_t l = 0; l < unit_cloud_.size(); ++l) {
                const cspan eta = unit_cloud_.point(l);
                for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + r_ * eta[static_cast<std::size_t>(i)];
                s += space_.weight.eval(z);
            }
            return unit_cloud_.box_volume * std::pow(r_, n) * s / static_cast<double>(unit_cloud_.proposals);
        }
        // per-center cloud (non-norm distances)
        const DriverKind drv = scheme_.kind == SchemeKind::mc ? DriverKind::pseudo_random : DriverKind::quasi_random;
        const BallCloud c = make_ball_cloud(space_.distance, y, r_, std::max<std::uint64_t>(scheme_.inner_count, 64),
                                            mix_seed(scheme_.seed, hash_tag("inner-point") ^ sample_index), drv);
        double s = 0.0;
        for (std::size_t l = 0; l < c.size(); ++l) s += space_.weight.eval(c.point(l));
        return c.box_volume * s / static_cast<double>(c.proposals);
    }

  private:
    SpaceDescriptor space_;
    double r_;
    QuadratureScheme scheme_;
    std::function<double(cspan)> exact_fn_;
    BallCloud unit_cloud_;
};

}  // namespace detail

// Weighted ball average of an arbitrary integrand by rejection QMC/MC.
// integrand receives (point, sample_index); the average is taken against the
// space measure restricted to B_r(x).
inline Estimate qmc_ball_average(const SpaceDescriptor& space, cspan x, double r,
                                 const QuadratureScheme& scheme,
                                 const std::function<double(cspan, std::uint64_t)>& integrand) {
    space.validate();
    if (space.measure_kind == MeasureKind::model)
        throw rejected_input("qmc_ball_average: model spaces expose ball volumes only");
    if (!(r > 0.0)) throw rejected_input("qmc_ball_average: radius must be positive");
    const DriverKind drv = scheme.kind == SchemeKind::mc ? DriverKind::pseudo_random : DriverKind::quasi_random;

    std::uint64_t count = std::max<std::uint64_t>(scheme.count, 16);
    for (;;) {
        const BallCloud cloud = make_ball_cloud(space.distance, x, r, count, scheme.seed, drv);
        if (cloud.size() == 0) {
            if (count < QuadratureScheme::max_count) {
                count *= 2;
                continue;
            }
            throw evaluation_failure("qmc_ball_average: no accepted samples in the ball");
        }
        detail::HalfSums num, den;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const cspan y = cloud.point(i);
            const double w = space.weight.eval(y);
            num.add(cloud.half[i], w * integrand(y, i));
            den.add(cloud.half[i], w);
        }
        const double den_total = den.total();
        if (!(den_total > 0.0))
            throw evaluation_failure("qmc_ball_average: vanishing sampled measure");
        const double value = num.total() / den_total;
        double err;
        if (den.sum[0] > 0.0 && den.sum[1] > 0.0) {
            const double a = num.sum[0] / den.sum[0];
            const double b = num.sum[1] / den.sum[1];
            err = 0.5 * std::abs(a - b);
        } else {
            err = std::abs(value);
        }
        if (scheme.tolerance > 0.0 && err > scheme.tolerance && count < QuadratureScheme::max_count) {
            count = std::min<std::uint64_t>(QuadratureScheme::max_count, count * 2);
            continue;
        }
        return Estimate{value, err, scheme.kind};
    }
}

// plain integral (not averaged): integral over B_r(x) of integrand dmu
inline Estimate qmc_ball_integral(const SpaceDescriptor& space, cspan x, double r,
                                  const QuadratureScheme& scheme,
                                  const std::function<double(cspan, std::uint64_t)>& integrand) {
    space.validate();
    if (space.measure_kind == MeasureKind::model)
        throw rejected_input("qmc_ball_integral: model spaces expose ball volumes only");
    const DriverKind drv = scheme.kind == SchemeKind::mc ? DriverKind::pseudo_random : DriverKind::quasi_random;
    std::uint64_t count = std::max<std::uint64_t>(scheme.count, 16);
    for (;;) {
        const BallCloud cloud = make_ball_cloud(space.distance, x, r, count, scheme.seed, drv);
        detail::HalfSums acc;
        std::size_t nhalf[2] = {0, 0};
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const cspan y = cloud.point(i);
            acc.add(cloud.half[i], space.weight.eval(y) * integrand(y, i));
            ++nhalf[cloud.half[i]];
        }
        const double scale = cloud.box_volume / static_cast<double>(cloud.proposals);
        const double value = acc.total() * scale;
        // each half represents half the proposals
        const double a = acc.sum[0] * cloud.box_volume / (0.5 * static_cast<double>(cloud.proposals));
        const double b = acc.sum[1] * cloud.box_volume / (0.5 * static_cast<double>(cloud.proposals));
        const double err = 0.5 * std::abs(a - b);
        if (scheme.tolerance > 0.0 && err > scheme.tolerance && count < QuadratureScheme::max_count) {
            count = std::min<std::uint64_t>(QuadratureScheme::max_count, count * 2);
            continue;
        }
        return Estimate{value, err, scheme.kind};
    }
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

inline Estimate ball_measure(const SpaceDescriptor& space, cspan x, double r,
                             const QuadratureScheme& scheme) {
    space.validate();
    if (!(r > 0.0)) throw rejected_input("ball_measure: radius must be positive");
    if (scheme.kind == SchemeKind::exact_polar || space.measure_kind == MeasureKind::model) {
        const auto v = exact_ball_measure(space, x, r);
        if (!v) throw rejected_input("ball_measure: (distance, weight) pair not in the exact catalog");
        if (*v < measure_underflow_guard) throw rejected_input("ball_measure: measure underflow");
        return Estimate{*v, 0.0, SchemeKind::exact_polar};
    }
    Estimate e = qmc_ball_integral(space, x, r, scheme, [](cspan, std::uint64_t) { return 1.0; });
    if (e.value < measure_underflow_guard) throw rejected_input("ball_measure: measure underflow");
    return e;
}

inline Estimate ball_average(const SpaceDescriptor& space, const ScalarField& f, cspan x, double r,
                             const QuadratureScheme& scheme) {
    space.validate();
    f.validate();
    if (!(r > 0.0)) throw rejected_input("ball_average: radius must be positive");
    if (scheme.kind == SchemeKind::exact_polar) {
        const auto num = exact_ball_integral(space, f, x, r);
        const auto den = exact_ball_measure(space, x, r);
        if (!num || !den)
            throw rejected_input("ball_average: (distance, weight, integrand) triple not in the exact catalog");
        if (*den < measure_underflow_guard) throw rejected_input("ball_average: measure underflow");
        return Estimate{*num / *den, 0.0, SchemeKind::exact_polar};
    }
    return qmc_ball_average(space, x, r, scheme, [&](cspan y, std::uint64_t) { return f.value(y); });
}

// A_r f(x) = average of f over B_r(x)
inline Estimate averaging_apply(const SpaceDescriptor& space, const ScalarField& f, cspan x, double r,
                                const QuadratureScheme& scheme) {
    return ball_average(space, f, x, r, scheme);
}

// A_r^* f(x) = integral over B_r(x) of f(y)/mu(B_r(y)) dmu(y)
inline Estimate adjoint_averaging_apply(const SpaceDescriptor& space, const ScalarField& f, cspan x,
                                        double r, const QuadratureScheme& scheme) {
    space.validate();
    f.validate();
    if (scheme.kind == SchemeKind::exact_polar) {
        // exact when both the integrand u(y) * w(y)/mu(B_r(y)) and the ball are catalogued
        detail::InnerMeasure inner(space, r, scheme);
        if (!inner.exact())
            throw rejected_input("adjoint_averaging_apply: inner measures not in the exact catalog");
        if (space.weight.kind == WeightKind::constant || space.measure_kind == MeasureKind::model) {
            return averaging_apply(space, f, x, r, scheme);  // equal ball measures
        }
        if (space.n == 1 && space.weight.kind == WeightKind::exp_linear) {
            // w(y)/mu(B_r(y)) is the constant s / (2 sinh(s r))
            const double s = space.weight.a[0];
            const double c = s == 0.0 ? 1.0 / (2.0 * r) : s / (2.0 * std::sinh(s * r));
            SpaceDescriptor leb = space;
            leb.weight = constant_weight(1.0);
            const auto num = exact_ball_integral(leb, f, x, r);
            if (!num) throw rejected_input("adjoint_averaging_apply: integrand not in the exact catalog");
            return Estimate{c * *num, 0.0, SchemeKind::exact_polar};
        }
        throw rejected_input("adjoint_averaging_apply: not in the exact catalog");
    }
    detail::InnerMeasure inner(space, r, scheme);
    const std::uint64_t budget = scheme.count * std::max<std::uint64_t>(scheme.inner_count, 1);
    if (!inner.exact() && budget > (1ULL << 33))
        throw evaluation_failure("adjoint_averaging_apply: nested-quadrature budget exceeded (" +
                                 std::to_string(budget) + " weight evaluations)");
    return qmc_ball_integral(space, x, r, scheme, [&](cspan y, std::uint64_t idx) {
        const double m = inner(y, idx);
        if (m < measure_underflow_guard) throw evaluation_failure("adjoint_averaging_apply: inner measure underflow");
        return f.value(y) / m;
    });
}

// ---------------------------------------------------------------------------
// evenness diagnostic for weights
// ---------------------------------------------------------------------------

struct EvennessStats {
    double sup_defect = 0.0;  // S_w(r), sampled sup of |w(x)-w(-x)| over B_r(0)
    double scale = 0.0;       // r * Lebesgue average of w over B_r(0)
    double ratio = 0.0;       // sup_defect / scale
};

inline EvennessStats evenness_stats(const WeightDescriptor& w, const NormDescriptor& norm, double r,
                                    std::size_t samples, std::uint64_t seed) {
    w.validate(norm.n);
    if (!(r > 0.0)) throw rejected_input("evenness_stats: radius must be positive");
    EvennessStats out;
    if (w.is_even()) {
        out.sup_defect = 0.0;
    } else if (auto ex = w.evenness_sup_exact(norm, r); ex.has_value()) {
        out.sup_defect = *ex;
    } else {
        DistanceDescriptor d;
        d.kind = DistanceKind::norm_induced;
        d.norm = norm;
        vec zero(static_cast<std::size_t>(norm.n), 0.0);
        const auto pts = sample_ball(d, zero, r, std::max<std::size_t>(samples, 10000), seed);
        vec neg(static_cast<std::size_t>(norm.n));
        for (const auto& p : pts) {
            for (int i = 0; i < norm.n; ++i) neg[static_cast<std::size_t>(i)] = -p[static_cast<std::size_t>(i)];
            out.sup_defect = std::max(out.sup_defect, std::abs(w.eval(p) - w.eval(neg)));
        }
    }
    SpaceDescriptor space = SpaceDescriptor::norm_weighted(norm, w);
    vec zero(static_cast<std::size_t>(norm.n), 0.0);
    // Lebesgue average of w over the ball
    SpaceDescriptor leb = space;
    leb.weight = constant_weight(1.0);
    ScalarField wf = weight_field(w, norm.n);
    QuadratureScheme scheme = QuadratureScheme::qmc(1ULL << 15, seed);
    double avg;
    if (auto num = exact_ball_integral(leb, wf, zero, r); num.has_value()) {
        avg = *num / (unit_ball_volume(norm) * std::pow(r, norm.n));
    } else {
        avg = qmc_ball_average(leb, zero, r, scheme, [&](cspan y, std::uint64_t) { return w.eval(y); }).value;
    }
    out.scale = r * avg;
    out.ratio = out.scale > 0.0 ? out.sup_defect / out.scale : 0.0;
    return out;
}

}  // namespace amvlab
