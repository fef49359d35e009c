#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amvlab {

inline constexpr const char* version_string = "amvlab 0.1.0";

using vec = std::vector<double>;
using cspan = std::span<const double>;

constexpr double pi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

// rejected input (precondition violation, bad descriptor, bad config)
struct rejected_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// runtime failure (budget exceeded, degenerate acceptance ratio, ...)
struct evaluation_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// deterministic seeding / pseudo-random driver
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// stable mixing of a seed with a use-site tag, so independent consumers of the
// same user seed get decorrelated streams
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    splitmix64(s);
    return splitmix64(s);
}

inline std::uint64_t hash_tag(const char* s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 1099511628211ULL;
    return h;
}

inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// formatting
// ---------------------------------------------------------------------------

// round-trip safe float printing (17 significant digits)
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// special functions
// ---------------------------------------------------------------------------

// volume of the unit Euclidean ball in dimension Q (Q need not be an integer)
inline double omega_q(double q) {
    if (!(q > 0.0)) throw rejected_input("omega_q: Q must be positive");
    return std::exp(0.5 * q * std::log(pi) - std::lgamma(0.5 * q + 1.0));
}

// integral over the unit sphere S^{n-1} of the monomial theta^beta;
// zero unless every exponent is even
inline double sphere_monomial_integral(std::span<const int> beta) {
    const int n = static_cast<int>(beta.size());
    int total = 0;
    for (int b : beta) {
        if (b < 0) throw rejected_input("sphere_monomial_integral: negative exponent");
        if (b % 2 != 0) return 0.0;
        total += b;
    }
    double log_num = 0.0;
    for (int b : beta) log_num += std::lgamma(0.5 * (b + 1));
    const double log_den = std::lgamma(0.5 * (n + total));
    return 2.0 * std::exp(log_num - log_den);
}

// integral over the unit Euclidean ball of y^beta
inline double ball_monomial_integral(std::span<const int> beta) {
    const int n = static_cast<int>(beta.size());
    int total = 0;
    for (int b : beta) {
        if (b % 2 != 0) return 0.0;
        total += b;
    }
    return sphere_monomial_integral(beta) / static_cast<double>(n + total);
}

// ---------------------------------------------------------------------------
// small polynomial-in-one-variable helpers (exact segment integration)
// ---------------------------------------------------------------------------

// evaluate sum c[k] t^k
inline double poly1_eval(cspan c, double t) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
}

// integral over [a,b] of sum c[k] t^k
inline double poly1_integral(cspan c, double a, double b) {
    double va = 0.0, vb = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        va = va * a + c[k] / static_cast<double>(k + 1);
        vb = vb * b + c[k] / static_cast<double>(k + 1);
    }
    return vb * b - va * a;
}

// integral over [a,b] of t^k e^{s t}, exact (recursion in k); s may be 0
inline double poly_exp_integral(int k, double s, double a, double b) {
    if (k < 0) throw rejected_input("poly_exp_integral: negative power");
    if (s == 0.0) {
        const vec mono = [&] { vec c(static_cast<std::size_t>(k) + 1, 0.0); c.back() = 1.0; return c; }();
        return poly1_integral(mono, a, b);
    }
    // antiderivative F_k(t) = t^k e^{st}/s - (k/s) F_{k-1}(t)
    auto F = [&](double t) {
        double acc = std::exp(s * t) / s;  // F_0
        double tp = 1.0;
        vec fs(static_cast<std::size_t>(k) + 1);
        fs[0] = acc;
        for (int j = 1; j <= k; ++j) {
            tp *= t;
            fs[static_cast<std::size_t>(j)] =
                tp * std::exp(s * t) / s - (j / s) * fs[static_cast<std::size_t>(j - 1)];
        }
        return fs[static_cast<std::size_t>(k)];
    };
    return F(b) - F(a);
}

// integral over [a,b] (with 0 <= a <= b or a <= b <= 0 or a <= 0 <= b) of
// t^k |t|^alpha, exact
inline double poly_abs_power_integral(int k, double alpha, double a, double b) {
    if (alpha <= -1.0) throw rejected_input("poly_abs_power_integral: non-integrable power");
    auto seg = [&](double lo, double hi, double sign) {
        // integral over [lo,hi] subset of [0,inf) of (sign*t)^k t^alpha
        const double p = k + alpha + 1.0;
        const double s = (k % 2 == 0) ? 1.0 : sign;
        return s * (std::pow(hi, p) - std::pow(lo, p)) / p;
    };
    double total = 0.0;
    if (a < 0.0) total += seg(0.0, -a, -1.0);
    if (b > 0.0) total += seg(0.0, b, 1.0);
    if (a > 0.0) total -= seg(0.0, a, 1.0);
    if (b < 0.0) total -= seg(0.0, -b, -1.0);
    return total;
}

// integral over [0,R] of rho^m / (rho^2 + c), c > 0, exact via the recursion
// R_m = R^{m-1}/(m-1) - c R_{m-2}
inline double radial_rational_integral(int m, double c, double R) {
    if (c <= 0.0) throw rejected_input("radial_rational_integral: c must be positive");
    if (m < 0) throw rejected_input("radial_rational_integral: negative power");
    const double sc = std::sqrt(c);
    double r0 = std::atan(R / sc) / sc;               // m = 0
    if (m == 0) return r0;
    double r1 = 0.5 * std::log((R * R + c) / c);      // m = 1
    if (m == 1) return r1;
    double prev2 = r0, prev1 = r1, cur = 0.0;
    for (int j = 2; j <= m; ++j) {
        cur = std::pow(R, j - 1) / (j - 1) - c * prev2;
        prev2 = prev1;
        prev1 = cur;
    }
    return cur;
}

}  // namespace amvlab
