#pragma once

#include <Eigen/Dense>
#include <functional>

#include "amvlab/quadrature.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// radius sweeps
// ---------------------------------------------------------------------------

struct RadiusSpec {
    double r0 = 0.2;     // largest radius
    double ratio = 0.5;  // geometric factor in (0,1)
    int count = 9;

    void validate() const {
        if (!(r0 > 0.0)) throw rejected_input("RadiusSpec: r0 must be positive");
        if (!(ratio > 0.0 && ratio < 1.0)) throw rejected_input("RadiusSpec: ratio must lie in (0,1)");
        if (count < 1) throw rejected_input("RadiusSpec: count must be >= 1");
    }
    vec radii() const {
        validate();
        vec out(static_cast<std::size_t>(count));
        double r = r0;
        for (int k = 0; k < count; ++k, r *= ratio) out[static_cast<std::size_t>(k)] = r;
        return out;
    }
};

struct ProfileRow {
    double r = 0.0;
    double value = 0.0;
    double error_bound = 0.0;
    bool ok = true;
    std::string message;
};

struct RadiusProfile {
    std::string quantity;
    std::vector<ProfileRow> rows;  // radii strictly decreasing

    std::size_t valid_count() const {
        std::size_t c = 0;
        for (const auto& row : rows)
            if (row.ok) ++c;
        return c;
    }
};

// one row per radius; per-row failures are recorded, not fatal
inline RadiusProfile sweep(const std::string& quantity_tag,
                           const std::function<Estimate(double)>& quantity, const RadiusSpec& spec) {
    RadiusProfile profile;
    profile.quantity = quantity_tag;
    for (double r : spec.radii()) {
        ProfileRow row;
        row.r = r;
        try {
            const Estimate e = quantity(r);
            row.value = e.value;
            row.error_bound = e.error_bound;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.message = ex.what();
        }
        profile.rows.push_back(std::move(row));
    }
    if (profile.valid_count() == 0) throw evaluation_failure("sweep: all rows failed");
    return profile;
}

// ---------------------------------------------------------------------------
// extrapolation to r -> 0
// ---------------------------------------------------------------------------

struct LimitVerdict {
    enum class Status { converged, diverging, oscillating };
    Status status = Status::oscillating;
    double limit = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = std::numeric_limits<double>::quiet_NaN();
    double rate = std::numeric_limits<double>::quiet_NaN();  // log-log growth rate when diverging
    int order = 0;                                           // leading residual power in r
    std::vector<double> accumulation;                        // candidate values when oscillating

    bool converged() const { return status == Status::converged; }
};

namespace detail {

struct FitResult {
    double a0 = 0.0;
    double se0 = 0.0;
    vec coeffs;
    vec stderrs;
    bool ok = false;
};

// weighted least squares of value ~ sum_j a_j (r/rmax)^j
inline FitResult polynomial_fit(const std::vector<ProfileRow>& rows, int degree) {
    FitResult fr;
    std::vector<const ProfileRow*> valid;
    for (const auto& r : rows)
        if (r.ok) valid.push_back(&r);
    const int m = static_cast<int>(valid.size());
    const int k = degree + 1;
    if (m < k) return fr;
    double rmax = 0.0, vmax = 0.0;
    for (const auto* r : valid) {
        rmax = std::max(rmax, r->r);
        vmax = std::max(vmax, std::abs(r->value));
    }
    const double err_floor = std::max(1e-14, 1e-12 * vmax);
    Eigen::MatrixXd X(m, k);
    Eigen::VectorXd y(m), w(m);
    for (int i = 0; i < m; ++i) {
        const double t = valid[static_cast<std::size_t>(i)]->r / rmax;
        double b = 1.0;
        for (int j = 0; j < k; ++j, b *= t) X(i, j) = b;
        y[i] = valid[static_cast<std::size_t>(i)]->value;
        w[i] = 1.0 / std::max(valid[static_cast<std::size_t>(i)]->error_bound, err_floor);
    }
    Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::VectorXd yw = w.asDiagonal() * y;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    if (qr.rank() < k) return fr;
    Eigen::VectorXd a = qr.solve(yw);
    // scatter of the weighted residual; keep a floor so exact profiles do not
    // produce zero standard errors
    const Eigen::VectorXd res = yw - Xw * a;
    double s2 = m > k ? res.squaredNorm() / (m - k) : 1.0;
    s2 = std::max(s2, 1.0);
    Eigen::MatrixXd cov = (Xw.transpose() * Xw).inverse() * s2;
    fr.ok = true;
    fr.a0 = a[0];
    fr.se0 = std::sqrt(std::max(0.0, cov(0, 0)));
    fr.coeffs.resize(static_cast<std::size_t>(k));
    fr.stderrs.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        fr.coeffs[static_cast<std::size_t>(j)] = a[j];  // coefficients in the scaled variable r/rmax
        fr.stderrs[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, cov(j, j)));
    }
    return fr;
}

inline std::vector<ProfileRow> drop_largest(const std::vector<ProfileRow>& rows, int count) {
    std::vector<ProfileRow> out;
    int dropped = 0;
    for (const auto& r : rows) {
        if (r.ok && dropped < count) {
            ++dropped;
            continue;
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace detail

inline LimitVerdict extrapolate(const RadiusProfile& profile, int degree = 2) {
    if (degree < 0) throw rejected_input("extrapolate: degree must be >= 0");
    std::vector<ProfileRow> valid;
    for (const auto& r : profile.rows)
        if (r.ok) valid.push_back(r);
    if (static_cast<int>(valid.size()) < degree + 2)
        throw rejected_input("extrapolate: need at least degree + 2 successful rows");

    LimitVerdict verdict;

    // divergence: |value| grows monotonically by >= 2x across the last three rows
    const std::size_t m = valid.size();
    if (m >= 3) {
        const double v2 = std::abs(valid[m - 1].value);
        const double v1 = std::abs(valid[m - 2].value);
        const double v0 = std::abs(valid[m - 3].value);
        if (v1 >= 2.0 * v0 && v2 >= 2.0 * v1 && v0 > 0.0) {
            verdict.status = LimitVerdict::Status::diverging;
            // growth exponent of |value| against r
            verdict.rate = std::log(v2 / v0) / std::log(valid[m - 1].r / valid[m - 3].r);
            return verdict;
        }
    }

    const detail::FitResult f0 = detail::polynomial_fit(valid, degree);
    if (!f0.ok) {
        verdict.status = LimitVerdict::Status::oscillating;
        return verdict;
    }
    std::vector<double> extrapolants{f0.a0};
    double unc = f0.se0;
    for (int drop = 1; drop <= 2; ++drop) {
        const auto sub = detail::drop_largest(valid, drop);
        if (static_cast<int>(sub.size()) >= degree + 2) {
            const detail::FitResult fj = detail::polynomial_fit(sub, degree);
            if (fj.ok) {
                extrapolants.push_back(fj.a0);
                unc = std::max(unc, fj.se0);
            }
        }
    }
    double spread = 0.0;
    for (double e : extrapolants) spread = std::max(spread, std::abs(e - extrapolants[0]));
    double vmax = 0.0;
    for (const auto& row : valid) vmax = std::max(vmax, std::abs(row.value));
    const double scale = std::max({std::abs(f0.a0), 0.1 * vmax, 1e-300});
    verdict.uncertainty = std::max(unc, spread);

    // converged: the nested extrapolants agree within the quoted uncertainty
    // and the fit actually explains the data
    const bool agree = spread <= std::max(10.0 * unc, 1e-10 * scale);
    const bool informative = unc <= 0.25 * scale + 1e-12;
    if (agree && informative) {
        verdict.status = LimitVerdict::Status::converged;
        verdict.limit = f0.a0;
        // leading residual order: smallest significant power
        verdict.order = 0;
        for (std::size_t j = 1; j < f0.coeffs.size(); ++j)
            if (std::abs(f0.coeffs[j]) > 3.0 * f0.stderrs[j] + 1e-9 * scale) {
                verdict.order = static_cast<int>(j);
                break;
            }
        return verdict;
    }

    // oscillating: report accumulation values from the even / odd subsequences
    verdict.status = LimitVerdict::Status::oscillating;
    std::vector<ProfileRow> even, odd;
    for (std::size_t i = 0; i < valid.size(); ++i) (i % 2 == 0 ? even : odd).push_back(valid[i]);
    for (const auto* part : {&even, &odd}) {
        const int deg = std::min<int>(degree, std::max<int>(0, static_cast<int>(part->size()) - 2));
        const detail::FitResult fp = detail::polynomial_fit(*part, deg);
        if (fp.ok) verdict.accumulation.push_back(fp.a0);
    }
    return verdict;
}

// slope of log(value) against log(r), robust (median of pairwise slopes)
inline double order_fit(const RadiusProfile& profile) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : profile.rows) {
        if (!row.ok) continue;
        if (!(row.value > 0.0)) throw rejected_input("order_fit: values must be positive");
        pts.emplace_back(std::log(row.r), std::log(row.value));
    }
    if (pts.size() < 2) throw rejected_input("order_fit: need at least two valid rows");
    vec slopes;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i].first - pts[j].first;
            if (dx != 0.0) slopes.push_back((pts[i].second - pts[j].second) / dx);
        }
    if (slopes.empty()) throw rejected_input("order_fit: degenerate radii");
    std::sort(slopes.begin(), slopes.end());
    const std::size_t mid = slopes.size() / 2;
    return slopes.size() % 2 == 1 ? slopes[mid] : 0.5 * (slopes[mid - 1] + slopes[mid]);
}

// ---------------------------------------------------------------------------
// region norms: strong / L^p convergence diagnostics
// ---------------------------------------------------------------------------

struct RegionNorm {
    bool sup = true;  // sup norm when true, discrete L^p otherwise
    double p = 2.0;
};

// rows hold the discrete norm over the sampled region of
// quantity(x, r) - reference(x)
inline RadiusProfile region_norm_sweep(const std::string& tag,
                                       const std::function<double(cspan, double)>& quantity,
                                       const std::vector<vec>& grid, const RegionNorm& norm,
                                       const RadiusSpec& radii,
                                       const std::function<double(cspan)>& reference) {
    if (grid.empty()) throw rejected_input("region_norm_sweep: empty grid");
    if (!norm.sup && !(norm.p >= 1.0)) throw rejected_input("region_norm_sweep: p must be >= 1");
    RadiusProfile profile;
    profile.quantity = tag;
    for (double r : radii.radii()) {
        ProfileRow row;
        row.r = r;
        try {
            if (norm.sup) {
                double mx = 0.0;
                for (const auto& x : grid) mx = std::max(mx, std::abs(quantity(x, r) - reference(x)));
                row.value = mx;
            } else {
                double acc = 0.0;
                for (const auto& x : grid) acc += std::pow(std::abs(quantity(x, r) - reference(x)), norm.p);
                row.value = std::pow(acc / static_cast<double>(grid.size()), 1.0 / norm.p);
            }
        } catch (const std::exception& ex) {
            row.ok = false;
            row.message = ex.what();
        }
        profile.rows.push_back(std::move(row));
    }
    if (profile.valid_count() == 0) throw evaluation_failure("region_norm_sweep: all rows failed");
    return profile;
}

// uniform grid over an axis-aligned box, a convenient region sampler
inline std::vector<vec> box_grid(cspan lo, cspan hi, int per_dim) {
    if (lo.size() != hi.size()) throw rejected_input("box_grid: bound size mismatch");
    if (per_dim < 2) throw rejected_input("box_grid: need at least two nodes per dimension");
    const int n = static_cast<int>(lo.size());
    std::vector<vec> pts;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        vec x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            x[static_cast<std::size_t>(i)] =
                lo[static_cast<std::size_t>(i)] +
                (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) *
                    (idx[static_cast<std::size_t>(i)] + 0.5) / per_dim;
        pts.push_back(std::move(x));
        int d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == per_dim) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == n) break;
    }
    return pts;
}

}  // namespace amvlab
