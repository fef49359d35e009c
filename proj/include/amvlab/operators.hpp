#pragma once

#include "amvlab/limits.hpp"

namespace amvlab {

namespace detail {

// u recentred so that the integrand is u(y) - u(x) with exact cancellation at
// the constant term
inline ScalarField shift_by_value(const ScalarField& u, double ux) {
    if (u.kind == FieldKind::polynomial) {
        ScalarField v = u;
        std::vector<int> zero(static_cast<std::size_t>(u.poly.n), 0);
        bool merged = false;
        for (auto& [e, c] : v.poly.terms)
            if (e == zero) {
                c -= ux;
                merged = true;
                break;
            }
        if (!merged) v.poly.terms.emplace_back(zero, -ux);
        return v;
    }
    throw rejected_input("shift_by_value: only polynomial fields shift exactly");
}

inline void require_point_quadrature(const SpaceDescriptor& space, const char* who) {
    if (space.measure_kind == MeasureKind::model)
        throw rejected_input(std::string(who) + ": model spaces expose ball volumes only");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// finite-radius AMV and SAMV operators
// ---------------------------------------------------------------------------

// r^{-2} * average over B_r(x) of (u(y) - u(x)) dmu
inline Estimate amv_at_radius(const SpaceDescriptor& space, const ScalarField& u, cspan x, double r,
                              const QuadratureScheme& scheme) {
    space.validate();
    u.validate();
    detail::require_point_quadrature(space, "amv_at_radius");
    if (!u.continuous_at(x))
        throw rejected_input("amv_at_radius: x must be a continuity point of u");
    const double ux = u.value(x);
    if (scheme.kind == SchemeKind::exact_polar) {
        const auto den = exact_ball_measure(space, x, r);
        if (!den) throw rejected_input("amv_at_radius: space not in the exact catalog");
        if (*den < measure_underflow_guard) throw rejected_input("amv_at_radius: measure underflow");
        std::optional<double> num;
        if (u.kind == FieldKind::polynomial)
            num = exact_ball_integral(space, detail::shift_by_value(u, ux), x, r);
        else {
            num = exact_ball_integral(space, u, x, r);
            if (num) *num -= ux * *den;
        }
        if (!num) throw rejected_input("amv_at_radius: integrand not in the exact catalog");
        return Estimate{*num / (*den * r * r), 0.0, SchemeKind::exact_polar};
    }
    Estimate e = qmc_ball_average(space, x, r, scheme,
                                  [&](cspan y, std::uint64_t) { return u.value(y) - ux; });
    e.value /= r * r;
    e.error_bound /= r * r;
    return e;
}

// cross term of the symmetrized kernel:
// I(r) = r^{-2} * integral over B_r(x) of (u(y) - u(x)) w(y)/mu(B_r(y)) dy
inline Estimate samv_cross_term(const SpaceDescriptor& space, const ScalarField& u, cspan x, double r,
                                const QuadratureScheme& scheme) {
    space.validate();
    u.validate();
    detail::require_point_quadrature(space, "samv_cross_term");
    const double ux = u.value(x);
    if (scheme.kind == SchemeKind::exact_polar) {
        if (space.weight.kind == WeightKind::constant) {
            // equal ball measures: the cross term is the unweighted AMV
            return amv_at_radius(space, u, x, r, scheme);
        }
        if (space.n == 1 && space.weight.kind == WeightKind::exp_linear &&
            space.distance.kind == DistanceKind::norm_induced) {
            // w(y)/mu(B_r(y)) = s/(2 sinh(s r)) is constant
            const double s = space.weight.a[0];
            const double c = s == 0.0 ? 1.0 / (2.0 * r) : s / (2.0 * std::sinh(s * r));
            SpaceDescriptor leb = space;
            leb.weight = constant_weight(1.0);
            const auto num = exact_ball_integral(leb, detail::shift_by_value(u, ux), x, r);
            if (!num) throw rejected_input("samv_cross_term: integrand not in the exact catalog");
            return Estimate{c * *num / (r * r), 0.0, SchemeKind::exact_polar};
        }
        if (space.weight.kind == WeightKind::power_alpha && space.weight.alpha == 2.0 &&
            detail::is_euclidean_norm(space.distance) && detail::is_origin(x) &&
            u.kind == FieldKind::polynomial) {
            // mu(B_r(y)) = omega_n r^n (|y|^2 + c); monomial-by-monomial
            // rational radial integrals are exact
            const int n = space.n;
            const double c = n * r * r / (n + 2.0);
            const double pref = omega_q(n) * std::pow(r, n);
            const Polynomial q = detail::shift_by_value(u, ux).poly;
            double total = 0.0;
            for (const auto& [e, coef] : q.terms) {
                if (coef == 0.0) continue;
                bool odd = false;
                int deg = 0;
                for (int b : e) {
                    if (b % 2 != 0) odd = true;
                    deg += b;
                }
                if (odd) continue;
                const double ang = sphere_monomial_integral(e);
                total += coef * ang * radial_rational_integral(deg + n + 1, c, r);
            }
            return Estimate{total / (pref * r * r), 0.0, SchemeKind::exact_polar};
        }
        throw rejected_input("samv_cross_term: not in the exact catalog");
    }
    detail::InnerMeasure inner(space, r, scheme);
    const double ww = 1.0;
    (void)ww;
    Estimate e = qmc_ball_integral(space, x, r, scheme, [&](cspan y, std::uint64_t idx) {
        const double m = inner(y, idx);
        if (m < measure_underflow_guard) throw evaluation_failure("samv_cross_term: inner measure underflow");
        return (u.value(y) - ux) / m;
    });
    e.value /= r * r;
    e.error_bound /= r * r;
    return e;
}

// (2 r^2)^{-1} * average over B_r(x) of (u(y)-u(x)) (1 + mu(B_r(x))/mu(B_r(y))) dmu
inline Estimate samv_at_radius(const SpaceDescriptor& space, const ScalarField& u, cspan x, double r,
                               const QuadratureScheme& scheme) {
    space.validate();
    u.validate();
    detail::require_point_quadrature(space, "samv_at_radius");
    if (!u.continuous_at(x))
        throw rejected_input("samv_at_radius: x must be a continuity point of u");
    if (scheme.kind == SchemeKind::exact_polar) {
        // exact evaluation through the half-sum identity with the cross term
        const Estimate a = amv_at_radius(space, u, x, r, scheme);
        const Estimate i = samv_cross_term(space, u, x, r, scheme);
        return Estimate{0.5 * (a.value + i.value), 0.0, SchemeKind::exact_polar};
    }
    const double ux = u.value(x);
    // direct kernel evaluation with measure ratios
    const auto ratio_fn = exact_measure_ratio(space, r);
    if (ratio_fn) {
        Estimate e = qmc_ball_average(space, x, r, scheme, [&](cspan y, std::uint64_t) {
            return (u.value(y) - ux) * (1.0 + (*ratio_fn)(x, y));
        });
        e.value /= 2.0 * r * r;
        e.error_bound /= 2.0 * r * r;
        return e;
    }
    detail::InnerMeasure inner(space, r, scheme);
    const double mx = inner(x, std::numeric_limits<std::uint64_t>::max());
    if (mx < measure_underflow_guard) throw rejected_input("samv_at_radius: measure underflow");
    Estimate e = qmc_ball_average(space, x, r, scheme, [&](cspan y, std::uint64_t idx) {
        const double my = inner(y, idx);
        if (my < measure_underflow_guard) throw evaluation_failure("samv_at_radius: inner measure underflow");
        return (u.value(y) - ux) * (1.0 + mx / my);
    });
    e.value /= 2.0 * r * r;
    e.error_bound /= 2.0 * r * r;
    return e;
}

// ---------------------------------------------------------------------------
// distortion diagnostics
// ---------------------------------------------------------------------------

struct DistortionReport {
    vec x;
    double r = 0.0;
    double q_exponent = 0.0;                          // Ahlfors exponent used for theta
    std::vector<std::pair<vec, double>> delta_samples;  // (y, delta_r(x,y))
    Estimate z_r{};                                   // ball average of |delta_r(x,.)|
    double eps = 0.0;                                 // sampled sup of |delta_r(x,.)|
    double v_r = 0.0;                                 // 1 - mu(B_r(x)) / (omega_n r^n)
    double theta = 0.0;                               // mu(B_r(x)) / (omega_Q r^Q)
    double mu_r_density = 0.0;                        // (1 - theta)/r
    Estimate z_Ln{};                                  // Lebesgue-volume distortion average
    double comparability_C = 1.0;                     // max of mu(B_r(x))/mu(B_r(y)) over samples
    bool exact_zero = false;                          // delta vanishes identically (catalog fact)
};

// deviation / Ahlfors quantities; Q defaults to the space dimension
inline std::tuple<double, double, double> deviation_and_theta(const SpaceDescriptor& space, cspan x,
                                                              double r, double Q,
                                                              const QuadratureScheme& scheme = QuadratureScheme::exact()) {
    space.validate();
    double mu;
    if (auto ex = exact_ball_measure(space, x, r); ex.has_value())
        mu = *ex;
    else
        mu = ball_measure(space, x, r, scheme.kind == SchemeKind::exact_polar ? QuadratureScheme::qmc() : scheme).value;
    const double v = 1.0 - mu / (omega_q(space.n) * std::pow(r, space.n));
    const double theta = mu / (omega_q(Q) * std::pow(r, Q));
    return {v, theta, (1.0 - theta) / r};
}

inline DistortionReport distortion_report(const SpaceDescriptor& space, cspan x, double r,
                                          const QuadratureScheme& scheme, std::size_t sample_budget = 256,
                                          std::optional<double> Q = std::nullopt) {
    space.validate();
    DistortionReport rep;
    rep.x.assign(x.begin(), x.end());
    rep.r = r;
    rep.q_exponent = Q.value_or(static_cast<double>(space.n));

    // translation-invariant catalog pairs have identically vanishing distortion
    const bool exact_zero =
        space.measure_kind == MeasureKind::model ||
        (space.distance.kind == DistanceKind::norm_induced && space.weight.kind == WeightKind::constant);
    rep.exact_zero = exact_zero;

    double mu_x;
    std::function<double(cspan, std::uint64_t)> measure_of;
    std::optional<detail::InnerMeasure> inner;
    if (exact_zero) {
        mu_x = exact_ball_measure(space, x, r).value();
        measure_of = [mu_x](cspan, std::uint64_t) { return mu_x; };
    } else {
        inner.emplace(space, r, scheme);
        mu_x = (*inner)(x, std::numeric_limits<std::uint64_t>::max());
        measure_of = [&inner](cspan y, std::uint64_t idx) { return (*inner)(y, idx); };
    }
    if (mu_x < measure_underflow_guard) throw rejected_input("distortion_report: measure underflow");

    auto delta_at = [&](cspan y, std::uint64_t idx) { return 1.0 - mu_x / measure_of(y, idx); };

    // sampled sup with deterministic boundary probes
    double eps = 0.0;
    double comp = 1.0;
    if (!exact_zero && space.measure_kind != MeasureKind::model) {
        const auto pts = sample_ball(space.distance, x, r, sample_budget,
                                     mix_seed(scheme.seed, hash_tag("distortion")));
        std::size_t idx = 0;
        const std::size_t keep = std::max<std::size_t>(1, pts.size() / 16);
        for (const auto& y : pts) {
            const double d = delta_at(y, idx);
            eps = std::max(eps, std::abs(d));
            comp = std::max(comp, mu_x / measure_of(y, idx));
            if (idx % keep == 0) rep.delta_samples.emplace_back(y, d);
            ++idx;
        }
        if (space.distance.kind == DistanceKind::norm_induced) {
            // boundary probes along the coordinate directions
            const double scale = (1.0 - 1e-6) * r;
            for (int i = 0; i < space.n; ++i)
                for (double sgn : {-1.0, 1.0}) {
                    vec y(x.begin(), x.end());
                    vec dir(static_cast<std::size_t>(space.n), 0.0);
                    dir[static_cast<std::size_t>(i)] = 1.0;
                    const double nv = norm_value(space.distance.norm, dir);
                    y[static_cast<std::size_t>(i)] += sgn * scale / nv;
                    const double d = delta_at(y, idx);
                    eps = std::max(eps, std::abs(d));
                    comp = std::max(comp, mu_x / measure_of(y, idx));
                    rep.delta_samples.emplace_back(std::move(y), d);
                    ++idx;
                }
        }
    }
    rep.eps = eps;
    rep.comparability_C = comp;

    // z_r: ball average of |delta|
    if (exact_zero) {
        rep.z_r = Estimate{0.0, 0.0, SchemeKind::exact_polar};
    } else if (space.n == 1 && space.weight.kind == WeightKind::exp_linear &&
               space.distance.kind == DistanceKind::norm_induced) {
        // exact: the average of |delta| equals tanh(|s| r / 2) independently of x
        const double s = std::abs(space.weight.a[0]);
        rep.z_r = Estimate{std::tanh(0.5 * s * r), 0.0, SchemeKind::exact_polar};
    } else {
        rep.z_r = qmc_ball_average(space, x, r, scheme,
                                   [&](cspan y, std::uint64_t idx) { return std::abs(delta_at(y, idx)); });
    }

    // z^{L^n}_r: same with Lebesgue volumes of the distance balls
    if (space.distance.kind == DistanceKind::norm_induced || space.measure_kind == MeasureKind::model) {
        rep.z_Ln = Estimate{0.0, 0.0, SchemeKind::exact_polar};
    } else {
        SpaceDescriptor leb = space;
        leb.measure_kind = MeasureKind::weighted_lebesgue;
        leb.weight = constant_weight(1.0);
        detail::InnerMeasure leb_inner(leb, r, scheme);
        const double vol_x = leb_inner(x, std::numeric_limits<std::uint64_t>::max());
        rep.z_Ln = qmc_ball_average(space, x, r, scheme, [&](cspan y, std::uint64_t idx) {
            return std::abs(1.0 - vol_x / leb_inner(y, idx));
        });
    }

    const auto [v, theta, dens] = deviation_and_theta(space, x, r, rep.q_exponent, scheme);
    rep.v_r = v;
    rep.theta = theta;
    rep.mu_r_density = dens;
    return rep;
}

// Pointwise-equality criterion: the AMV and SAMV limits provably coincide at x
// when sup_{y in B_r(x)} |delta_r(x,y)| = O(r^2).  The diagnostic sweeps the
// sampled sup and fits its order; identically vanishing distortion passes
// trivially.
struct EqualityCriterion {
    bool predicts_equality = false;
    bool identically_zero = false;
    double eps_order = std::numeric_limits<double>::quiet_NaN();
    RadiusProfile eps_profile;
};

inline EqualityCriterion equality_criterion(const SpaceDescriptor& space, cspan x,
                                            const RadiusSpec& radii, const QuadratureScheme& scheme) {
    EqualityCriterion out;
    out.eps_profile.quantity = "eps_x";
    bool all_zero = true;
    for (double r : radii.radii()) {
        ProfileRow row;
        row.r = r;
        try {
            const DistortionReport rep = distortion_report(space, x, r, scheme, 128);
            row.value = rep.eps;
            if (rep.eps > 1e-13) all_zero = false;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.message = ex.what();
        }
        out.eps_profile.rows.push_back(std::move(row));
    }
    out.identically_zero = all_zero;
    if (all_zero) {
        out.predicts_equality = true;
        return out;
    }
    out.eps_order = order_fit(out.eps_profile);
    out.predicts_equality = out.eps_order >= 1.8;
    return out;
}

// ---------------------------------------------------------------------------
// weak pairings against compactly supported test functions
// ---------------------------------------------------------------------------

enum class WeakVariant { amv, samv, mu_r, abs_mu_r };

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1]
inline void gauss_legendre(int m, vec& nodes, vec& weights) {
    nodes.resize(static_cast<std::size_t>(m));
    weights.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double t = std::cos(pi * (i + 0.75) / (m + 0.5));
        double p0 = 0.0, p1 = 0.0;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1);
            }
            const double dp = m * (t * p0 - p1) / (t * t - 1.0);
            const double dt = p0 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        // recompute derivative at the converged node
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1);
        }
        const double dp = m * (t * p0 - p1) / (t * t - 1.0);
        nodes[static_cast<std::size_t>(i)] = t;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// exact weak AMV pairing for the 1-d sign field against a polynomial bump on
// the unweighted line: the finite-radius operator is (t - r sgn t)/r^3 inside
// (-r,r) and zero outside
inline std::optional<double> exact_sign_pairing_1d(const SpaceDescriptor& space, const ScalarField& u,
                                                   const ScalarField& phi, double r) {
    if (space.n != 1 || space.weight.kind != WeightKind::constant) return std::nullopt;
    if (space.distance.kind != DistanceKind::norm_induced) return std::nullopt;
    if (u.kind != FieldKind::sign_function) return std::nullopt;
    vec phi_coeffs;
    double supp_lo, supp_hi;
    if (phi.kind == FieldKind::bump) {
        phi_coeffs = exact::bump_factor_coeffs_in_t(phi.bump.center[0], phi.bump.halfwidth[0], phi.bump.slope[0]);
        supp_lo = phi.bump.center[0] - phi.bump.halfwidth[0];
        supp_hi = phi.bump.center[0] + phi.bump.halfwidth[0];
    } else if (phi.kind == FieldKind::polynomial) {
        phi_coeffs.assign(32, 0.0);
        for (const auto& [e, c] : phi.poly.terms) phi_coeffs[static_cast<std::size_t>(e[0])] += c;
        supp_lo = -std::numeric_limits<double>::infinity();
        supp_hi = std::numeric_limits<double>::infinity();
    } else {
        return std::nullopt;
    }
    const double w = space.weight.c;
    // pairing = w * int phi(t) (t - r sgn t)/r^3 dt over (-r,r) intersect supp
    auto piece = [&](double lo, double hi, double shift) {
        if (!(hi > lo)) return 0.0;
        // phi(t) * (t + shift): multiply coefficients by (t + shift)
        vec q(phi_coeffs.size() + 1, 0.0);
        for (std::size_t k = 0; k < phi_coeffs.size(); ++k) {
            q[k + 1] += phi_coeffs[k];
            q[k] += phi_coeffs[k] * shift;
        }
        return poly1_integral(q, lo, hi);
    };
    const double neg = piece(std::max(-r, supp_lo), std::min(0.0, supp_hi), r);   // t + r on (-r,0)
    const double pos = piece(std::max(0.0, supp_lo), std::min(r, supp_hi), -r);   // t - r on (0,r)
    return w * (neg + pos) / (r * r * r);
}

}  // namespace detail

// integral over the space of phi * (finite-radius operator of u) dmu, or the
// mu_r / |mu_r| pairings
inline Estimate weak_pairing(const SpaceDescriptor& space, const ScalarField& u, const ScalarField& phi,
                             double r, WeakVariant variant, const QuadratureScheme& scheme) {
    space.validate();
    phi.validate();
    detail::require_point_quadrature(space, "weak_pairing");
    if (phi.kind != FieldKind::bump && phi.kind != FieldKind::polynomial)
        throw rejected_input("weak_pairing: test functions come from the polynomial bump catalog");
    if (phi.kind != FieldKind::bump)
        throw rejected_input("weak_pairing: phi must be compactly supported");

    // support box, inflated by r for the operator variants
    const int n = space.n;
    vec lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    const double inflate = (variant == WeakVariant::amv || variant == WeakVariant::samv) ? r : 0.0;
    for (int i = 0; i < n; ++i) {
        lo[static_cast<std::size_t>(i)] = phi.bump.center[static_cast<std::size_t>(i)] - phi.bump.halfwidth[static_cast<std::size_t>(i)] - inflate;
        hi[static_cast<std::size_t>(i)] = phi.bump.center[static_cast<std::size_t>(i)] + phi.bump.halfwidth[static_cast<std::size_t>(i)] + inflate;
    }
    if (space.distance.kind == DistanceKind::alpha_warped)
        for (int i = 0; i < n; ++i)
            if (lo[static_cast<std::size_t>(i)] <= 0.0)
                throw rejected_input("weak_pairing: support escapes the descriptor domain");

    if (variant == WeakVariant::amv)
        if (auto ex = detail::exact_sign_pairing_1d(space, u, phi, r); ex.has_value())
            return Estimate{*ex, 0.0, SchemeKind::exact_polar};

    // translation-invariant catalog spaces have theta == 1 identically
    if ((variant == WeakVariant::mu_r || variant == WeakVariant::abs_mu_r) &&
        space.distance.kind == DistanceKind::norm_induced && space.weight.kind == WeightKind::constant &&
        space.n >= 1) {
        const double theta_val =
            space.weight.c * unit_ball_volume(space.distance.norm) / omega_q(space.n);
        if (std::abs(theta_val - 1.0) < 1e-15)
            return Estimate{0.0, 0.0, SchemeKind::exact_polar};
    }

    // tensor Gauss-Legendre over the support box
    const int per_dim = n == 1 ? 96 : (n == 2 ? 32 : 12);
    vec gl_nodes, gl_weights;
    detail::gauss_legendre(per_dim, gl_nodes, gl_weights);
    QuadratureScheme node_scheme = scheme;
    node_scheme.count = std::max<std::uint64_t>(scheme.count / 8, 1024);

    double total = 0.0, err_total = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::uint64_t node_counter = 0;
    for (;;) {
        vec xnode(static_cast<std::size_t>(n));
        double gw = 1.0;
        for (int i = 0; i < n; ++i) {
            const double a = lo[static_cast<std::size_t>(i)], b = hi[static_cast<std::size_t>(i)];
            xnode[static_cast<std::size_t>(i)] = 0.5 * (a + b) + 0.5 * (b - a) * gl_nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            gw *= 0.5 * (b - a) * gl_weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        }
        const double phival = phi.value(xnode);
        if (phival != 0.0 || variant == WeakVariant::amv || variant == WeakVariant::samv) {
            double contrib = 0.0, err = 0.0;
            const double wdens = space.weight.eval(xnode);
            QuadratureScheme ns = node_scheme;
            ns.seed = mix_seed(scheme.seed, hash_tag("weak-node") ^ node_counter);
            switch (variant) {
                case WeakVariant::amv: {
                    if (phival != 0.0 && u.continuous_at(xnode)) {
                        const Estimate e = amv_at_radius(space, u, xnode, r, ns);
                        contrib = phival * e.value * wdens;
                        err = std::abs(phival) * e.error_bound * wdens;
                    }
                    break;
                }
                case WeakVariant::samv: {
                    if (phival != 0.0 && u.continuous_at(xnode)) {
                        const Estimate e = samv_at_radius(space, u, xnode, r, ns);
                        contrib = phival * e.value * wdens;
                        err = std::abs(phival) * e.error_bound * wdens;
                    }
                    break;
                }
                case WeakVariant::mu_r:
                case WeakVariant::abs_mu_r: {
                    if (phival != 0.0) {
                        const auto [v, theta, dens] = deviation_and_theta(space, xnode, r,
                                                                          static_cast<double>(space.n), ns);
                        (void)v;
                        (void)theta;
                        const double val = variant == WeakVariant::mu_r ? dens : std::abs(dens);
                        contrib = phival * val * wdens;
                    }
                    break;
                }
            }
            total += gw * contrib;
            err_total += std::abs(gw) * err;
        }
        ++node_counter;
        int d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == per_dim) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == n) break;
    }
    return Estimate{total, err_total, scheme.kind};
}

// ---------------------------------------------------------------------------
// blow-up moments at a vanishing-weight base point
// ---------------------------------------------------------------------------

struct BlowupMoments {
    double r = 0.0;
    Matrix M_nu;        // second moments of nu_r
    Matrix M_nu_tilde;  // second moments of nu~_r
    double nu_mass = 1.0;
    double nu_mass_error = 0.0;
};

inline BlowupMoments blowup_moments(const WeightDescriptor& w, const NormDescriptor& norm, double r,
                                    const QuadratureScheme& scheme) {
    norm.validate();
    w.validate(norm.n);
    const int n = norm.n;
    SpaceDescriptor space = SpaceDescriptor::norm_weighted(norm, w);
    vec origin(static_cast<std::size_t>(n), 0.0);

    BlowupMoments out;
    out.r = r;
    out.M_nu = Matrix::Zero(n, n);
    out.M_nu_tilde = Matrix::Zero(n, n);

    double mu0;
    if (auto ex = exact_ball_measure(space, origin, r); ex.has_value())
        mu0 = *ex;
    else
        mu0 = ball_measure(space, origin, r, scheme).value;
    if (mu0 < measure_underflow_guard) throw rejected_input("blowup_moments: ball measure underflow");

    // M_nu[i][j] = r^{-2} average over B_r(0) of x_i x_j dmu
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Polynomial mono;
            mono.n = n;
            std::vector<int> e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(i)] += 1;
            e[static_cast<std::size_t>(j)] += 1;
            mono.terms = {{e, 1.0}};
            const ScalarField f = polynomial_field(mono);
            double v;
            if (scheme.kind == SchemeKind::exact_polar) {
                const auto num = exact_ball_integral(space, f, origin, r);
                if (!num) throw rejected_input("blowup_moments: weight not in the exact catalog");
                v = *num / mu0;
            } else {
                v = qmc_ball_average(space, origin, r, scheme,
                                     [&](cspan y, std::uint64_t) { return f.value(y); })
                        .value;
            }
            out.M_nu(i, j) = v / (r * r);
            out.M_nu(j, i) = out.M_nu(i, j);
        }

    // M_nu~[i][j] = (r^2 mu0)^{-1} int x_i x_j w~(x) dx,
    // w~ = (w/2)(1 + mu0/mu(B_r(x)))
    const bool tilde_exact = scheme.kind == SchemeKind::exact_polar && w.kind == WeightKind::power_alpha &&
                             w.alpha == 2.0 && detail::is_euclidean_norm(space.distance);
    if (tilde_exact) {
        const double c = n * r * r / (n + 2.0);
        const double pref = omega_q(n) * std::pow(r, n);
        for (int i = 0; i < n; ++i) {
            // int x_i^2 |x|^2 / (omega_n r^n (|x|^2 + c)) dx, radial-angular split
            std::vector<int> e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(i)] = 2;
            const double ang = sphere_monomial_integral(e);
            const double cross = ang * radial_rational_integral(2 + n + 1, c, r) / pref;
            out.M_nu_tilde(i, i) = 0.5 * out.M_nu(i, i) + 0.5 * cross / (r * r);
        }
        out.nu_mass = 1.0;
        out.nu_mass_error = 0.0;
        return out;
    }
    if (scheme.kind == SchemeKind::exact_polar) {
        if (w.kind == WeightKind::constant) {
            out.M_nu_tilde = out.M_nu;
            return out;
        }
        throw rejected_input("blowup_moments: symmetrized moments not in the exact catalog for this weight");
    }

    detail::InnerMeasure inner(space, r, scheme);
    const Estimate mass = qmc_ball_average(space, origin, r, scheme, [](cspan, std::uint64_t) { return 1.0; });
    out.nu_mass = mass.value;  // identically one; retained as a consistency check
    out.nu_mass_error = mass.error_bound;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Estimate e = qmc_ball_average(space, origin, r, scheme, [&](cspan y, std::uint64_t idx) {
                const double my = inner(y, idx);
                if (my < measure_underflow_guard) throw evaluation_failure("blowup_moments: inner measure underflow");
                return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * 0.5 * (1.0 + mu0 / my);
            });
            out.M_nu_tilde(i, j) = e.value / (r * r);
            out.M_nu_tilde(j, i) = out.M_nu_tilde(i, j);
        }
    return out;
}

// ---------------------------------------------------------------------------
// empirical second moments of distance balls (Lebesgue averages)
// ---------------------------------------------------------------------------

inline Matrix empirical_second_moment(const SpaceDescriptor& space, cspan x, double r,
                                      const QuadratureScheme& scheme = QuadratureScheme::exact()) {
    space.validate();
    detail::require_point_quadrature(space, "empirical_second_moment");
    const int n = space.n;
    SpaceDescriptor leb = space;
    leb.weight = constant_weight(1.0);
    Matrix M = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Polynomial mono;
            mono.n = n;
            std::vector<int> e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(i)] += 1;
            e[static_cast<std::size_t>(j)] += 1;
            mono.terms = {{e, 1.0}};
            // recentre at x: integrand is (y-x)_i (y-x)_j
            vec negx(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) negx[static_cast<std::size_t>(k)] = -x[static_cast<std::size_t>(k)];
            const Polynomial shifted = mono.shifted(negx);  // p(y - x)
            const ScalarField f = polynomial_field(shifted);
            double v;
            if (auto num = exact_ball_integral(leb, f, x, r); num.has_value() && scheme.kind == SchemeKind::exact_polar) {
                const double den = exact_ball_measure(leb, x, r).value();
                v = *num / den;
            } else {
                QuadratureScheme s = scheme.kind == SchemeKind::exact_polar ? QuadratureScheme::qmc() : scheme;
                v = qmc_ball_average(leb, x, r, s, [&](cspan y, std::uint64_t) { return f.value(y); }).value;
            }
            M(i, j) = v / (r * r);
            M(j, i) = M(i, j);
        }
    return M;
}

}  // namespace amvlab
