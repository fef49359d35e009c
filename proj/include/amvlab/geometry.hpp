#pragma once

#include <algorithm>
#include <optional>
#include <utility>

#include "amvlab/common.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// norms
// ---------------------------------------------------------------------------

struct NormDescriptor {
    int n = 1;
    double p = 2.0;  // l^p exponent, p >= 1; infinity() selects the max norm

    void validate() const {
        if (n < 1) throw rejected_input("NormDescriptor: dimension must be >= 1");
        if (!(p >= 1.0)) throw rejected_input("NormDescriptor: p must be >= 1 or infinity");
    }
    bool is_max_norm() const { return std::isinf(p); }
};

inline double norm_value(const NormDescriptor& nd, cspan v) {
    if (static_cast<int>(v.size()) != nd.n) throw rejected_input("norm_value: dimension mismatch");
    if (nd.is_max_norm()) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    if (nd.p == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    if (nd.p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), nd.p);
    return std::pow(s, 1.0 / nd.p);
}

// exact volume of { ||x||_p < 1 } in R^n: 2^n Gamma(1+1/p)^n / Gamma(1+n/p)
inline double unit_ball_volume(const NormDescriptor& nd) {
    nd.validate();
    if (nd.is_max_norm()) return std::pow(2.0, nd.n);
    return std::exp(nd.n * std::log(2.0) + nd.n * std::lgamma(1.0 + 1.0 / nd.p) -
                    std::lgamma(1.0 + nd.n / nd.p));
}

// diagonal entry of the second-moment matrix of the unit l^p ball,
// (1/vol) * int x_1^2 dx = [Gamma(3/p)/Gamma(1/p)] * [Gamma(1+n/p)/Gamma(1+(n+2)/p)]
inline double norm_ball_second_moment(const NormDescriptor& nd) {
    nd.validate();
    if (nd.is_max_norm()) return 1.0 / 3.0;
    return std::exp(std::lgamma(3.0 / nd.p) - std::lgamma(1.0 / nd.p) +
                    std::lgamma(1.0 + nd.n / nd.p) - std::lgamma(1.0 + (nd.n + 2.0) / nd.p));
}

// ---------------------------------------------------------------------------
// model-space ball volumes (constant curvature)
// ---------------------------------------------------------------------------

enum class ModelKind { euclidean, sphere, hyperbolic };

struct ModelVolumeOracle {
    ModelKind model = ModelKind::euclidean;
    int n = 2;

    void validate() const {
        if (n < 1) throw rejected_input("ModelVolumeOracle: dimension must be >= 1");
    }

    double injectivity_bound() const {
        return model == ModelKind::sphere ? pi : std::numeric_limits<double>::infinity();
    }

    // exact geodesic-ball volume: sigma_{n-1} * int_0^r sn(t)^{n-1} dt with
    // sn = t, sin t, sinh t depending on the model
    double ball_volume(double r) const {
        validate();
        if (!(r > 0.0)) throw rejected_input("ball_volume: radius must be positive");
        if (r > injectivity_bound()) throw rejected_input("ball_volume: radius above injectivity bound");
        const double surface = n * omega_q(n);  // sigma_{n-1}
        if (model == ModelKind::euclidean) return omega_q(n) * std::pow(r, n);
        // I_k(r) = int_0^r sn(t)^k dt via the standard recursion
        const bool sph = model == ModelKind::sphere;
        auto sn = [&](double t) { return sph ? std::sin(t) : std::sinh(t); };
        auto cs = [&](double t) { return sph ? std::cos(t) : std::cosh(t); };
        const int k = n - 1;
        double i0 = r;
        double i1 = sph ? 1.0 - std::cos(r) : std::cosh(r) - 1.0;
        if (k == 0) return surface * i0;
        if (k == 1) return surface * i1;
        double prev2 = i0, prev1 = i1, cur = 0.0;
        for (int j = 2; j <= k; ++j) {
            const double boundary = std::pow(sn(r), j - 1) * cs(r);
            cur = sph ? ((j - 1) * prev2 - boundary) / j : (boundary - (j - 1) * prev2) / j;
            prev2 = prev1;
            prev1 = cur;
        }
        return surface * cur;
    }

    // scalar curvature of the unit-curvature model
    double scalar_curvature() const {
        switch (model) {
            case ModelKind::euclidean: return 0.0;
            case ModelKind::sphere: return static_cast<double>(n) * (n - 1);
            case ModelKind::hyperbolic: return -static_cast<double>(n) * (n - 1);
        }
        return 0.0;
    }
};

inline double model_ball_volume(const ModelVolumeOracle& oracle, double r) {
    return oracle.ball_volume(r);
}

// ---------------------------------------------------------------------------
// distances
// ---------------------------------------------------------------------------

enum class DistanceKind { norm_induced, alpha_warped, asymmetric_half_line, model_space };

// interval with open endpoints, used for 1-d ball descriptions
struct Interval {
    double lo, hi;
    double length() const { return std::max(0.0, hi - lo); }
};

struct DistanceDescriptor {
    DistanceKind kind = DistanceKind::norm_induced;
    NormDescriptor norm{};          // norm_induced and alpha_warped base norm
    std::vector<int> alpha{};       // alpha_warped exponents, entries in {1,2}
    ModelVolumeOracle model{};      // model_space

    int dimension() const {
        switch (kind) {
            case DistanceKind::norm_induced: return norm.n;
            case DistanceKind::alpha_warped: return norm.n;
            case DistanceKind::asymmetric_half_line: return 1;
            case DistanceKind::model_space: return model.n;
        }
        return 0;
    }

    void validate() const {
        switch (kind) {
            case DistanceKind::norm_induced: norm.validate(); break;
            case DistanceKind::alpha_warped:
                norm.validate();
                if (static_cast<int>(alpha.size()) != norm.n)
                    throw rejected_input("alpha_warped: alpha size must match dimension");
                for (int a : alpha)
                    if (a != 1 && a != 2) throw rejected_input("alpha_warped: alpha entries must be 1 or 2");
                break;
            case DistanceKind::asymmetric_half_line: break;
            case DistanceKind::model_space: model.validate(); break;
        }
    }

    bool point_in_domain(cspan x) const {
        if (static_cast<int>(x.size()) != dimension()) return false;
        if (kind == DistanceKind::alpha_warped)
            for (double xi : x)
                if (!(xi > 0.0)) return false;
        return true;
    }
};

namespace detail {

inline void apply_warp(const DistanceDescriptor& d, cspan x, double* out) {
    for (int i = 0; i < d.norm.n; ++i)
        out[i] = d.alpha[static_cast<std::size_t>(i)] == 1 ? x[static_cast<std::size_t>(i)]
                                                           : x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
}

inline double asymmetric_half_line_distance(double x, double y) {
    if (x <= 0.0 && y <= 0.0) return std::abs(x - y);
    if (x > 0.0 && y > 0.0) return 0.5 * std::abs(x - y);
    if (x <= 0.0) return 0.5 * y - x;  // y > 0
    return 0.5 * x - y;                // x > 0, y <= 0
}

}  // namespace detail

inline double distance(const DistanceDescriptor& d, cspan x, cspan y) {
    d.validate();
    if (!d.point_in_domain(x) || !d.point_in_domain(y))
        throw rejected_input("distance: point outside descriptor domain");
    switch (d.kind) {
        case DistanceKind::norm_induced: {
            vec diff(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
            return norm_value(d.norm, diff);
        }
        case DistanceKind::alpha_warped: {
            vec wx(x.size()), wy(x.size());
            detail::apply_warp(d, x, wx.data());
            detail::apply_warp(d, y, wy.data());
            for (std::size_t i = 0; i < x.size(); ++i) wx[i] -= wy[i];
            return norm_value(d.norm, wx);
        }
        case DistanceKind::asymmetric_half_line:
            return detail::asymmetric_half_line_distance(x[0], y[0]);
        case DistanceKind::model_space:
            throw rejected_input("distance: model spaces expose ball volumes only");
    }
    return 0.0;
}

inline bool in_ball(const DistanceDescriptor& d, cspan center, double r, cspan y) {
    return distance(d, center, y) < r;
}

// the 1-d ball of the asymmetric half-line metric, as a single interval
inline Interval asymmetric_half_line_ball(double x, double r) {
    // lower end: d(x,y) < r for y below x
    double lo, hi;
    if (x <= 0.0) {
        lo = x - r;
        hi = (r + x > 0.0) ? 2.0 * (r + x) : x + r;  // crosses 0 iff x + r > 0
    } else {
        lo = (0.5 * x - r < 0.0) ? 0.5 * x - r : x - 2.0 * r;
        hi = x + 2.0 * r;
    }
    return {lo, hi};
}

// coordinate bounding box of B_r(center); exact for 1-d descriptors, tight
// l^inf box otherwise (alpha-warped boxes are computed in warped coordinates
// and pulled back)
struct Box {
    vec lo, hi;
    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
};

inline Box ball_bounding_box(const DistanceDescriptor& d, cspan center, double r) {
    d.validate();
    if (!d.point_in_domain(center)) throw rejected_input("ball_bounding_box: center outside domain");
    const int n = d.dimension();
    Box box;
    box.lo.resize(static_cast<std::size_t>(n));
    box.hi.resize(static_cast<std::size_t>(n));
    switch (d.kind) {
        case DistanceKind::norm_induced:
            for (int i = 0; i < n; ++i) {
                box.lo[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] - r;
                box.hi[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] + r;
            }
            return box;
        case DistanceKind::alpha_warped: {
            for (int i = 0; i < n; ++i) {
                const double ci = center[static_cast<std::size_t>(i)];
                if (d.alpha[static_cast<std::size_t>(i)] == 1) {
                    box.lo[static_cast<std::size_t>(i)] = ci - r;
                    box.hi[static_cast<std::size_t>(i)] = ci + r;
                } else {
                    const double w = ci * ci;
                    if (w - r <= 0.0)
                        throw rejected_input("ball_bounding_box: alpha-warped ball touches the orthant boundary");
                    box.lo[static_cast<std::size_t>(i)] = std::sqrt(w - r);
                    box.hi[static_cast<std::size_t>(i)] = std::sqrt(w + r);
                }
                if (box.lo[static_cast<std::size_t>(i)] <= 0.0)
                    throw rejected_input("ball_bounding_box: alpha-warped ball touches the orthant boundary");
            }
            return box;
        }
        case DistanceKind::asymmetric_half_line: {
            const Interval iv = asymmetric_half_line_ball(center[0], r);
            box.lo[0] = iv.lo;
            box.hi[0] = iv.hi;
            return box;
        }
        case DistanceKind::model_space:
            throw rejected_input("ball_bounding_box: model spaces expose ball volumes only");
    }
    return box;
}

// balls of norm-induced distances are symmetric about their center; used by
// the samplers for antithetic pairing
inline bool ball_is_center_symmetric(const DistanceDescriptor& d) {
    return d.kind == DistanceKind::norm_induced;
}

}  // namespace amvlab
