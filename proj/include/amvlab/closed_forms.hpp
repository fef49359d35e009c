#pragma once

#include "amvlab/operators.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// analytic limit predictions backing the verification harness
// ---------------------------------------------------------------------------

struct Prediction {
    std::string quantity;     // amv | samv | deviation-coefficient | moment-matrix
    double value = std::numeric_limits<double>::quiet_NaN();
    Matrix matrix;            // for moment-matrix predictions
    bool diverges = false;    // the limit provably fails to exist
    std::string citation;     // closed-forms catalog tag
    std::vector<std::string> preconditions;
    // alternative value under the unnormalized blow-up convention, reported
    // whenever the two conventions disagree (see README)
    std::optional<double> value_alt;
};

// second-moment matrix of the unit ball of a norm (exact)
inline Matrix norm_second_moment(const NormDescriptor& nd) {
    return norm_ball_second_moment(nd) * Matrix::Identity(nd.n, nd.n);
}

// positive-weight limits for a C^1 weight w with w(x) > 0 and ball-symmetric
// distance with limiting moment matrix M:
//   amv  = (1/2) Tr(M H) + (1/w) <grad w, M grad u>
//   samv = (1/2) Tr(M H) + (1/(2w)) <M grad u, grad w>
inline std::pair<Prediction, Prediction> predict_positive_weight(const ScalarField& u,
                                                                 const WeightDescriptor& w, cspan x,
                                                                 const Matrix& M) {
    const double wx = w.eval(x);
    if (!(wx > 0.0)) throw rejected_input("predict_positive_weight: weight must be positive at x");
    if (!w.differentiable_at(x)) throw rejected_input("predict_positive_weight: weight not C^1 at x");
    const Matrix H = u.hessian(x);
    const Vector gu = u.gradient(x);
    const Vector gw = w.gradient(x);
    const double base = 0.5 * (M * H).trace();
    const double drift = gw.dot(M * gu) / wx;
    Prediction amv;
    amv.quantity = "amv";
    amv.value = base + drift;
    amv.citation = "positive-weight-amv";
    amv.preconditions = {"w(x) > 0", "w is C^1 near x", "balls are symmetric about their center",
                         "M(x) = lim M^r(x) exists"};
    Prediction samv;
    samv.quantity = "samv";
    samv.value = base + 0.5 * drift;
    samv.citation = "positive-weight-samv";
    samv.preconditions = amv.preconditions;
    samv.preconditions.push_back("Lebesgue ball-volume distortion is o(r)");
    return {amv, samv};
}

// vanishing-weight limits from blow-up second-moment matrices:
//   amv  = (1/2) Tr(M_nu H(0)),  samv = (1/2) Tr(M_nu~ H(0))
inline std::pair<Prediction, std::optional<Prediction>> predict_vanishing_weight(
    const ScalarField& u, const Matrix& M_nu, const std::optional<Matrix>& M_nu_tilde) {
    vec origin(static_cast<std::size_t>(M_nu.rows()), 0.0);
    const Matrix H = u.hessian(origin);
    Prediction amv;
    amv.quantity = "amv";
    amv.value = 0.5 * (M_nu * H).trace();
    amv.citation = "vanishing-weight-amv";
    amv.preconditions = {"w vanishes at the base point", "w infinitesimally even",
                         "blow-up measures converge"};
    std::optional<Prediction> samv;
    if (M_nu_tilde.has_value()) {
        Prediction s;
        s.quantity = "samv";
        s.value = 0.5 * (*M_nu_tilde * H).trace();
        s.citation = "vanishing-weight-samv";
        s.preconditions = amv.preconditions;
        s.preconditions.push_back("comparability condition at the base point");
        samv = std::move(s);
    }
    return {amv, samv};
}

// blow-up moment matrix of the weight |x|^alpha: M_nu = (n+alpha)/(n(n+alpha+2)) I
inline Matrix alpha_weight_moment_matrix(int n, double alpha) {
    if (!(alpha > 0.0)) throw rejected_input("alpha_weight_moment_matrix: alpha must be positive");
    return (n + alpha) / (n * (n + alpha + 2.0)) * Matrix::Identity(n, n);
}

// symmetrized companion under the half-sum-with-uniform convention:
// M_nu~ = (M_nu + I/(n+2)) / 2
inline Matrix alpha_weight_moment_matrix_tilde(int n, double alpha) {
    return 0.5 * (alpha_weight_moment_matrix(n, alpha) + Matrix::Identity(n, n) / (n + 2.0));
}

// ---------------------------------------------------------------------------
// separable weights w(x) = f(|x|) g(x/|x|) at the origin (n = 2 for general g)
// ---------------------------------------------------------------------------

struct SeparablePrediction {
    bool condition_holds = false;   // first angular moment orthogonal to grad u(0)
    bool diverges = false;          // condition fails with nonzero pairing
    Matrix moment_matrix;           // normalized blow-up second moments
    Matrix moment_matrix_literal;   // unnormalized convention, for comparison
    Prediction amv;
    vec first_moment;               // integral of theta g over the circle (unnormalized)
};

inline SeparablePrediction predict_separable(const ScalarField& u, const RadialPart& f,
                                             const AngularFourier& g, int n = 2) {
    if (n != 2) throw rejected_input("predict_separable: general angular parts require n = 2");
    f.validate();
    g.validate();
    // radial integrability of f rho^{n-1}
    if (!(f.weighted_integral(n - 1, 1.0) > 0.0))
        throw rejected_input("predict_separable: radial part has no mass");

    SeparablePrediction out;
    // first angular moment: for a trigonometric polynomial only the m = 1
    // harmonics contribute
    const double m1c = g.am.empty() ? 0.0 : g.am[0];
    const double m1s = g.bm.empty() ? 0.0 : g.bm[0];
    out.first_moment = {pi * m1c, pi * m1s};
    vec origin(static_cast<std::size_t>(n), 0.0);
    const Vector gu = u.gradient(origin);
    const double pairing = gu[0] * out.first_moment[0] + gu[1] * out.first_moment[1];
    out.condition_holds = std::abs(pairing) < 1e-14;

    // normalized moment matrix:
    // radial ratio [int f rho^{n+1} / int f rho^{n-1}] times angular moments
    // normalized by the angular mass
    const double radial_ratio = f.weighted_integral(n + 1, 1.0) / f.weighted_integral(n - 1, 1.0);
    const double ang_mass = g.moment(0, 0);
    Matrix ang(n, n);
    ang(0, 0) = g.moment(2, 0);
    ang(1, 1) = g.moment(0, 2);
    ang(0, 1) = ang(1, 0) = g.moment(1, 1);
    out.moment_matrix = radial_ratio * ang / ang_mass;

    // literal convention: nu = (c_f g) sigma with sigma the normalized surface
    // measure and c_f = int_0^1 f rho^{n+1}
    const double c_f = f.weighted_integral(n + 1, 1.0);
    out.moment_matrix_literal = c_f * ang / (2.0 * pi);

    out.amv.quantity = "amv";
    out.amv.citation = "separable-weight-amv";
    out.amv.preconditions = {"w separable and vanishing at the origin",
                             "first angular moment orthogonal to grad u(0)"};
    if (!out.condition_holds) {
        out.diverges = true;
        out.amv.diverges = true;
        return out;
    }
    const Matrix H = u.hessian(origin);
    out.amv.value = 0.5 * (out.moment_matrix * H).trace();
    const double literal = 0.5 * (out.moment_matrix_literal * H).trace();
    if (std::abs(literal - out.amv.value) > 1e-13 * std::max(1.0, std::abs(out.amv.value)))
        out.amv.value_alt = literal;
    return out;
}

// ---------------------------------------------------------------------------
// constant-curvature deviation coefficient
// ---------------------------------------------------------------------------

// predicted limit of v_r / r^2 on a constant-curvature model with scalar
// curvature S: c_n * S with c_n = 1/(6(n+2))
inline Prediction predict_riemannian_deviation(int n, double scalar_curvature) {
    Prediction p;
    p.quantity = "deviation-coefficient";
    p.value = scalar_curvature / (6.0 * (n + 2.0));
    p.citation = "ball-volume-expansion";
    p.preconditions = {"constant-curvature model"};
    return p;
}

inline Prediction predict_riemannian_deviation(const ModelVolumeOracle& oracle) {
    return predict_riemannian_deviation(oracle.n, oracle.scalar_curvature());
}

// documented constant for the 3-d contact sub-Riemannian expansion
// 1 - c_1 k(x) r^2 + O(r^3); the geometry behind it is out of scope, the
// quadratic decay rate is what the diagnostics compare against
inline int sub_riemannian_deviation_order() { return 2; }

}  // namespace amvlab
