#pragma once

#include "amvlab/geometry.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// low-discrepancy driver: additive (Kronecker) sequence with a seeded shift
// ---------------------------------------------------------------------------

// generalized golden ratio: the real root > 1 of x^{d+1} = x + 1
inline double harmonious_root(int d) {
    double x = 1.5;
    for (int it = 0; it < 64; ++it) x = std::pow(1.0 + x, 1.0 / (d + 1));
    return x;
}

class KroneckerSequence {
  public:
    KroneckerSequence(int dim, std::uint64_t seed) : dim_(dim), alpha_(static_cast<std::size_t>(dim)), shift_(static_cast<std::size_t>(dim)) {
        const double g = harmonious_root(dim);
        double a = 1.0;
        std::uint64_t s = seed;
        for (int i = 0; i < dim; ++i) {
            a /= g;
            alpha_[static_cast<std::size_t>(i)] = a;
            shift_[static_cast<std::size_t>(i)] = u64_to_unit(splitmix64(s));
        }
    }

    // k-th point in [0,1)^dim
    void point(std::uint64_t k, double* out) const {
        for (int i = 0; i < dim_; ++i) {
            double v = shift_[static_cast<std::size_t>(i)] + static_cast<double>(k + 1) * alpha_[static_cast<std::size_t>(i)];
            out[i] = v - std::floor(v);
        }
    }

    int dim() const { return dim_; }

  private:
    int dim_;
    vec alpha_, shift_;
};

// counter-based pseudo-random driver (plain Monte Carlo), order-independent
class CounterRandomSequence {
  public:
    CounterRandomSequence(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

    void point(std::uint64_t k, double* out) const {
        std::uint64_t s = seed_ ^ (k * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        splitmix64(s);
        for (int i = 0; i < dim_; ++i) out[i] = u64_to_unit(splitmix64(s));
    }

    int dim() const { return dim_; }

  private:
    int dim_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// ball point clouds by rejection from the bounding box
// ---------------------------------------------------------------------------

enum class DriverKind { quasi_random, pseudo_random };

// A cloud of points inside B_r(center) produced by rejection from the
// bounding box.  `proposals` counts every box sample (members of an
// antithetic pair count separately), which makes
//     integral_B f  ~=  box_volume * sum_{accepted} f / proposals
// unbiased.  `half` marks the two interleaved sub-streams used for the
// self-consistent error estimate.
struct BallCloud {
    int dim = 0;
    bool antithetic = false;
    std::size_t proposals = 0;
    double box_volume = 0.0;
    std::vector<double> pts;       // row-major accepted points
    std::vector<std::uint8_t> half;

    std::size_t size() const { return half.size(); }
    cspan point(std::size_t i) const { return cspan(pts.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)); }
};

namespace detail {

template <class Driver>
BallCloud make_ball_cloud(const DistanceDescriptor& d, cspan center, double r,
                          std::uint64_t total_proposals, const Driver& driver) {
    const int n = d.dimension();
    const Box box = ball_bounding_box(d, center, r);
    BallCloud cloud;
    cloud.dim = n;
    cloud.box_volume = box.volume();
    cloud.antithetic = ball_is_center_symmetric(d);
    cloud.pts.reserve(static_cast<std::size_t>(total_proposals) * static_cast<std::size_t>(n));
    vec u(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n)), y2(static_cast<std::size_t>(n));
    if (cloud.antithetic) {
        const std::uint64_t pairs = total_proposals / 2;
        for (std::uint64_t k = 0; k < pairs; ++k) {
            driver.point(k, u.data());
            bool inside = true;
            for (int i = 0; i < n; ++i) {
                const double off = (2.0 * u[static_cast<std::size_t>(i)] - 1.0) * r;
                y[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] + off;
                y2[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] - off;
            }
            inside = in_ball(d, center, r, y);
            cloud.proposals += 2;
            if (inside) {
                const auto h = static_cast<std::uint8_t>(k & 1);
                cloud.pts.insert(cloud.pts.end(), y.begin(), y.end());
                cloud.half.push_back(h);
                cloud.pts.insert(cloud.pts.end(), y2.begin(), y2.end());
                cloud.half.push_back(h);
            }
        }
    } else {
        for (std::uint64_t k = 0; k < total_proposals; ++k) {
            driver.point(k, u.data());
            for (int i = 0; i < n; ++i)
                y[static_cast<std::size_t>(i)] =
                    box.lo[static_cast<std::size_t>(i)] +
                    u[static_cast<std::size_t>(i)] * (box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)]);
            cloud.proposals += 1;
            if (in_ball(d, center, r, y)) {
                cloud.pts.insert(cloud.pts.end(), y.begin(), y.end());
                cloud.half.push_back(static_cast<std::uint8_t>(k & 1));
            }
        }
    }
    return cloud;
}

}  // namespace detail

inline BallCloud make_ball_cloud(const DistanceDescriptor& d, cspan center, double r,
                                 std::uint64_t total_proposals, std::uint64_t seed,
                                 DriverKind kind = DriverKind::quasi_random) {
    if (total_proposals == 0) throw rejected_input("make_ball_cloud: empty budget");
    if (kind == DriverKind::quasi_random)
        return detail::make_ball_cloud(d, center, r, total_proposals, KroneckerSequence(d.dimension(), seed));
    return detail::make_ball_cloud(d, center, r, total_proposals, CounterRandomSequence(d.dimension(), seed));
}

// Deterministic sample of `count` points strictly inside B_r(center).
// Fails with a diagnostic when the box acceptance ratio degenerates.
inline std::vector<vec> sample_ball(const DistanceDescriptor& d, cspan center, double r,
                                    std::size_t count, std::uint64_t seed) {
    if (count < 1) throw rejected_input("sample_ball: count must be >= 1");
    d.validate();
    if (!(r > 0.0)) throw rejected_input("sample_ball: radius must be positive");
    const int n = d.dimension();
    const Box box = ball_bounding_box(d, center, r);
    KroneckerSequence driver(n, seed);
    std::vector<vec> out;
    out.reserve(count);
    vec u(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    const bool symmetric = ball_is_center_symmetric(d);
    std::size_t proposals = 0;
    std::uint64_t k = 0;
    const std::size_t guard_window = std::max<std::size_t>(100000, 1000 * count);
    while (out.size() < count) {
        driver.point(k++, u.data());
        if (symmetric) {
            bool inside = true;
            vec y2(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const double off = (2.0 * u[static_cast<std::size_t>(i)] - 1.0) * r;
                y[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] + off;
                y2[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] - off;
            }
            inside = in_ball(d, center, r, y);
            proposals += 2;
            if (inside) {
                out.push_back(y);
                if (out.size() < count) out.push_back(std::move(y2));
            }
        } else {
            for (int i = 0; i < n; ++i)
                y[static_cast<std::size_t>(i)] =
                    box.lo[static_cast<std::size_t>(i)] +
                    u[static_cast<std::size_t>(i)] * (box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)]);
            ++proposals;
            if (in_ball(d, center, r, y)) out.push_back(y);
        }
        if (proposals >= guard_window && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(proposals))
            throw evaluation_failure("sample_ball: acceptance ratio below 1e-3 after " +
                                     std::to_string(proposals) + " proposals");
    }
    return out;
}

}  // namespace amvlab
