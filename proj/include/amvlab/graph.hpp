#pragma once

#include <map>
#include <queue>

#include <Eigen/Dense>

#include "amvlab/common.hpp"

namespace amvlab {

// ---------------------------------------------------------------------------
// metric graphs: 1-complexes with edge lengths, unit H^1 density on edges,
// vertex atoms, and optional semi-infinite rays
// ---------------------------------------------------------------------------

struct GraphVertex {
    std::string id;
    double atom = 0.0;
};

struct GraphEdge {
    int u = 0, v = 0;
    double length = 1.0;
};

struct GraphRay {
    int base = 0;
};

struct GraphPoint {
    enum class Kind { vertex, edge, ray } kind = Kind::vertex;
    int index = 0;     // vertex / edge / ray index
    double offset = 0.0;  // along the edge from u, or along the ray from base

    static GraphPoint at_vertex(int v) { return {Kind::vertex, v, 0.0}; }
    static GraphPoint on_edge(int e, double t) { return {Kind::edge, e, t}; }
    static GraphPoint on_ray(int rr, double t) { return {Kind::ray, rr, t}; }
};

class MetricGraph {
  public:
    std::vector<GraphVertex> vertices;
    std::vector<GraphEdge> edges;
    std::vector<GraphRay> rays;

    void finalize() {
        const int nv = static_cast<int>(vertices.size());
        if (nv == 0) throw rejected_input("MetricGraph: no vertices");
        for (const auto& e : edges) {
            if (e.u < 0 || e.u >= nv || e.v < 0 || e.v >= nv)
                throw rejected_input("MetricGraph: edge endpoint out of range");
            if (!(e.length > 0.0)) throw rejected_input("MetricGraph: edge length must be positive");
        }
        for (const auto& r : rays)
            if (r.base < 0 || r.base >= nv) throw rejected_input("MetricGraph: ray base out of range");
        for (const auto& v : vertices)
            if (v.atom < 0.0) throw rejected_input("MetricGraph: atom masses must be >= 0");
        adjacency_.assign(static_cast<std::size_t>(nv), {});
        for (std::size_t i = 0; i < edges.size(); ++i) {
            adjacency_[static_cast<std::size_t>(edges[i].u)].emplace_back(edges[i].v, edges[i].length);
            adjacency_[static_cast<std::size_t>(edges[i].v)].emplace_back(edges[i].u, edges[i].length);
        }
        dist_.assign(static_cast<std::size_t>(nv), vec(static_cast<std::size_t>(nv), 0.0));
        for (int s = 0; s < nv; ++s) dist_[static_cast<std::size_t>(s)] = dijkstra(s);
        for (int s = 0; s < nv; ++s)
            for (int t = 0; t < nv; ++t)
                if (!std::isfinite(dist_[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)]))
                    throw rejected_input("MetricGraph: graph must be connected");
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }
    double vertex_distance(int a, int b) const { return dist_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    double min_edge_length() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : edges) m = std::min(m, e.length);
        return m;
    }

    // distances from an arbitrary point to every vertex
    vec distances_to_vertices(const GraphPoint& p) const {
        require_finalized();
        const int nv = static_cast<int>(vertices.size());
        vec d(static_cast<std::size_t>(nv));
        switch (p.kind) {
            case GraphPoint::Kind::vertex:
                return dist_[static_cast<std::size_t>(p.index)];
            case GraphPoint::Kind::edge: {
                const GraphEdge& e = edges[static_cast<std::size_t>(p.index)];
                for (int j = 0; j < nv; ++j)
                    d[static_cast<std::size_t>(j)] = std::min(p.offset + vertex_distance(e.u, j),
                                                              (e.length - p.offset) + vertex_distance(e.v, j));
                return d;
            }
            case GraphPoint::Kind::ray: {
                const GraphRay& rr = rays[static_cast<std::size_t>(p.index)];
                for (int j = 0; j < nv; ++j)
                    d[static_cast<std::size_t>(j)] = p.offset + vertex_distance(rr.base, j);
                return d;
            }
        }
        return d;
    }

    double point_distance(const GraphPoint& p, const GraphPoint& q) const {
        const vec dp = distances_to_vertices(p);
        double best = std::numeric_limits<double>::infinity();
        switch (q.kind) {
            case GraphPoint::Kind::vertex:
                best = dp[static_cast<std::size_t>(q.index)];
                break;
            case GraphPoint::Kind::edge: {
                const GraphEdge& e = edges[static_cast<std::size_t>(q.index)];
                best = std::min(dp[static_cast<std::size_t>(e.u)] + q.offset,
                                dp[static_cast<std::size_t>(e.v)] + e.length - q.offset);
                if (p.kind == GraphPoint::Kind::edge && p.index == q.index)
                    best = std::min(best, std::abs(p.offset - q.offset));
                break;
            }
            case GraphPoint::Kind::ray: {
                const GraphRay& rr = rays[static_cast<std::size_t>(q.index)];
                best = dp[static_cast<std::size_t>(rr.base)] + q.offset;
                if (p.kind == GraphPoint::Kind::ray && p.index == q.index)
                    best = std::min(best, std::abs(p.offset - q.offset));
                break;
            }
        }
        return best;
    }

  private:
    void require_finalized() const {
        if (!finalized_) throw rejected_input("MetricGraph: call finalize() first");
    }

    vec dijkstra(int source) const {
        const int nv = static_cast<int>(vertices.size());
        vec dist(static_cast<std::size_t>(nv), std::numeric_limits<double>::infinity());
        dist[static_cast<std::size_t>(source)] = 0.0;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        pq.emplace(0.0, source);
        while (!pq.empty()) {
            const auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[static_cast<std::size_t>(u)]) continue;
            for (const auto& [v, len] : adjacency_[static_cast<std::size_t>(u)]) {
                const double nd = d + len;
                if (nd < dist[static_cast<std::size_t>(v)]) {
                    dist[static_cast<std::size_t>(v)] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        return dist;
    }

    std::vector<std::vector<std::pair<int, double>>> adjacency_;
    std::vector<vec> dist_;
    bool finalized_ = false;
};

// ---------------------------------------------------------------------------
// exact ball measures and affine integrals on metric graphs
// ---------------------------------------------------------------------------

namespace graph_detail {

struct IntervalList {
    std::vector<std::pair<double, double>> iv;

    void add(double lo, double hi, double clip_lo, double clip_hi) {
        lo = std::max(lo, clip_lo);
        hi = std::min(hi, clip_hi);
        if (hi > lo) iv.emplace_back(lo, hi);
    }
    // merge in place; returns union as disjoint sorted intervals
    std::vector<std::pair<double, double>> merged() {
        std::sort(iv.begin(), iv.end());
        std::vector<std::pair<double, double>> out;
        for (const auto& [a, b] : iv) {
            if (!out.empty() && a <= out.back().second)
                out.back().second = std::max(out.back().second, b);
            else
                out.emplace_back(a, b);
        }
        return out;
    }
    double total_length() {
        double t = 0.0;
        for (const auto& [a, b] : merged()) t += b - a;
        return t;
    }
};

// covered intervals of edge e for the ball B_r(p), given distances dp from p
inline IntervalList edge_coverage(const MetricGraph& g, const vec& dp, const GraphPoint& p, int e_idx,
                                  double r) {
    const GraphEdge& e = g.edges[static_cast<std::size_t>(e_idx)];
    IntervalList list;
    const double du = dp[static_cast<std::size_t>(e.u)];
    const double dv = dp[static_cast<std::size_t>(e.v)];
    if (du < r) list.add(0.0, r - du, 0.0, e.length);
    if (dv < r) list.add(e.length - (r - dv), e.length, 0.0, e.length);
    if (p.kind == GraphPoint::Kind::edge && p.index == e_idx)
        list.add(p.offset - r, p.offset + r, 0.0, e.length);
    return list;
}

inline IntervalList ray_coverage(const MetricGraph& g, const vec& dp, const GraphPoint& p, int r_idx,
                                 double r) {
    const GraphRay& ray = g.rays[static_cast<std::size_t>(r_idx)];
    IntervalList list;
    const double huge = std::numeric_limits<double>::infinity();
    const double db = dp[static_cast<std::size_t>(ray.base)];
    if (db < r) list.add(0.0, r - db, 0.0, huge);
    if (p.kind == GraphPoint::Kind::ray && p.index == r_idx) list.add(p.offset - r, p.offset + r, 0.0, huge);
    return list;
}

}  // namespace graph_detail

// exact mu(B_r(p)) = atoms within distance < r plus covered edge/ray length
inline double graph_ball_measure(const MetricGraph& g, const GraphPoint& p, double r) {
    if (!(r > 0.0)) throw rejected_input("graph_ball_measure: radius must be positive");
    const vec dp = g.distances_to_vertices(p);
    double total = 0.0;
    for (std::size_t j = 0; j < g.vertices.size(); ++j)
        if (dp[j] < r) total += g.vertices[j].atom;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto cover = graph_detail::edge_coverage(g, dp, p, static_cast<int>(e), r);
        total += cover.total_length();
    }
    for (std::size_t rr = 0; rr < g.rays.size(); ++rr) {
        auto cover = graph_detail::ray_coverage(g, dp, p, static_cast<int>(rr), r);
        total += cover.total_length();
    }
    return total;
}

// piecewise-linear vertex function: affine along edges, constant along rays
struct GraphField {
    vec vertex_values;

    double at(const MetricGraph& g, const GraphPoint& p) const {
        switch (p.kind) {
            case GraphPoint::Kind::vertex:
                return vertex_values[static_cast<std::size_t>(p.index)];
            case GraphPoint::Kind::edge: {
                const GraphEdge& e = g.edges[static_cast<std::size_t>(p.index)];
                const double uu = vertex_values[static_cast<std::size_t>(e.u)];
                const double uv = vertex_values[static_cast<std::size_t>(e.v)];
                return uu + (uv - uu) * p.offset / e.length;
            }
            case GraphPoint::Kind::ray:
                return vertex_values[static_cast<std::size_t>(g.rays[static_cast<std::size_t>(p.index)].base)];
        }
        return 0.0;
    }
};

// exact integral of u over B_r(p) against the graph measure
inline double graph_ball_integral(const MetricGraph& g, const GraphField& u, const GraphPoint& p,
                                  double r) {
    const vec dp = g.distances_to_vertices(p);
    double total = 0.0;
    for (std::size_t j = 0; j < g.vertices.size(); ++j)
        if (dp[j] < r) total += g.vertices[j].atom * u.vertex_values[j];
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const GraphEdge& ed = g.edges[e];
        const double uu = u.vertex_values[static_cast<std::size_t>(ed.u)];
        const double uv = u.vertex_values[static_cast<std::size_t>(ed.v)];
        auto cover = graph_detail::edge_coverage(g, dp, p, static_cast<int>(e), r);
        for (const auto& [a, b] : cover.merged()) {
            const double mid = 0.5 * (a + b);
            total += (b - a) * (uu + (uv - uu) * mid / ed.length);
        }
    }
    for (std::size_t rr = 0; rr < g.rays.size(); ++rr) {
        const double ub = u.vertex_values[static_cast<std::size_t>(g.rays[rr].base)];
        auto cover = graph_detail::ray_coverage(g, dp, p, static_cast<int>(rr), r);
        total += ub * cover.total_length();
    }
    return total;
}

inline double graph_amv(const MetricGraph& g, const GraphField& u, const GraphPoint& p, double r) {
    const double mu = graph_ball_measure(g, p, r);
    if (!(mu > 0.0)) throw rejected_input("graph_amv: empty ball");
    const double avg = graph_ball_integral(g, u, p, r) / mu;
    return (avg - u.at(g, p)) / (r * r);
}

// ---------------------------------------------------------------------------
// exact symmetrized operator on graphs
// ---------------------------------------------------------------------------

namespace graph_detail {

// integral over [t0,t1] of (a + b t) * 1/(c + d t), exact
inline double affine_over_affine_integral(double a, double b, double c, double d, double t0, double t1) {
    const double span = t1 - t0;
    const double cmid = c + d * 0.5 * (t0 + t1);
    if (std::abs(d) * std::max(std::abs(t0), std::abs(t1)) < 1e-13 * std::abs(cmid)) {
        // effectively constant denominator
        return (a + b * 0.5 * (t0 + t1)) * span / cmid;
    }
    const double ratio = (c + d * t1) / (c + d * t0);
    if (!(ratio > 0.0)) throw evaluation_failure("affine_over_affine_integral: denominator crosses zero");
    return (b / d) * span + (a - b * c / d) / d * std::log(ratio);
}

// measure of the ball of radius r around the point at offset t of edge e,
// as a function usable for breakpoint detection
struct MovingCenter {
    const MetricGraph* g;
    int e_idx = -1;   // moving along this edge (or ray when r_idx >= 0)
    int r_idx = -1;
    double r = 0.0;

    GraphPoint point(double t) const {
        return r_idx >= 0 ? GraphPoint::on_ray(r_idx, t) : GraphPoint::on_edge(e_idx, t);
    }
    double measure(double t) const { return graph_ball_measure(*g, point(t), r); }

    // candidate breakpoints of t -> mu(B_r(center(t))) on [lo,hi]
    vec breakpoints(double lo, double hi) const {
        vec bp{lo, hi};
        auto push = [&](double t) {
            if (t > lo + 1e-15 && t < hi - 1e-15) bp.push_back(t);
        };
        const int nv = static_cast<int>(g->vertices.size());
        // distance from the moving point to vertex j is
        // min(t + A_j, (L - t) + B_j) on an edge, or t + A_j on a ray
        vec A(static_cast<std::size_t>(nv)), B(static_cast<std::size_t>(nv), std::numeric_limits<double>::infinity());
        double L = std::numeric_limits<double>::infinity();
        if (r_idx >= 0) {
            const int base = g->rays[static_cast<std::size_t>(r_idx)].base;
            for (int j = 0; j < nv; ++j) A[static_cast<std::size_t>(j)] = g->vertex_distance(base, j);
        } else {
            const GraphEdge& e = g->edges[static_cast<std::size_t>(e_idx)];
            L = e.length;
            for (int j = 0; j < nv; ++j) {
                A[static_cast<std::size_t>(j)] = g->vertex_distance(e.u, j);
                B[static_cast<std::size_t>(j)] = g->vertex_distance(e.v, j);
            }
        }
        // the moving-ball measure is piecewise affine in t; its kinks come
        // from (i) leg ties of d_j(t), (ii) solutions of d_j(t) = c for the
        // thresholds c that change the covered-interval pattern, and (iii)
        // merge equations of end intervals.  d_j has legs t + A_j and
        // (L - t) + B_j, so every equation d_j(t) = c contributes t = c - A_j
        // and t = L + B_j - c.
        auto push_threshold = [&](int j, double c) {
            push(c - A[static_cast<std::size_t>(j)]);
            if (std::isfinite(L)) push(L + B[static_cast<std::size_t>(j)] - c);
        };
        for (int j = 0; j < nv; ++j) {
            if (std::isfinite(L))
                push(0.5 * (L + B[static_cast<std::size_t>(j)] - A[static_cast<std::size_t>(j)]));  // leg tie
            push_threshold(j, r);  // atom enters / interval endpoint touches the edge end
        }
        for (const auto& e2 : g->edges) {
            // end interval reaches the far end of edge e2
            push_threshold(e2.u, r - e2.length);
            push_threshold(e2.v, r - e2.length);
            // merge of the two end intervals: d_u'(t) + d_v'(t) = 2r - L'
            const double au = A[static_cast<std::size_t>(e2.u)], bu = B[static_cast<std::size_t>(e2.u)];
            const double av = A[static_cast<std::size_t>(e2.v)], bv = B[static_cast<std::size_t>(e2.v)];
            const double target = 2.0 * r - e2.length;
            push(0.5 * (target - au - av));
            if (std::isfinite(L)) push(L + 0.5 * (bu + bv - target));
        }
        // own-edge direct interval touching the ends, and its merges with the
        // end intervals (slope-2 crossings)
        if (std::isfinite(L)) {
            push(r);
            push(L - r);
            for (int j = 0; j < nv; ++j) {
                push(0.5 * (2.0 * r - A[static_cast<std::size_t>(j)]));
                push(L - 0.5 * (2.0 * r - B[static_cast<std::size_t>(j)]));
            }
        }
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end(),
                             [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                 bp.end());
        return bp;
    }
};

// integrate (u(y)-u0)*(1 + mu_p/mu(B_r(y))) over the covered portion of one
// edge or ray, with mu piecewise affine in the parameter; subdivides until
// the affine model is exact
inline double integrate_kernel_piece(const MovingCenter& mc, double a_u, double b_u, double u0,
                                     double mu_p, double lo, double hi, int depth = 0) {
    const double m_lo = mc.measure(lo);
    const double m_hi = mc.measure(hi);
    const double m_mid = mc.measure(0.5 * (lo + hi));
    const double lin = 0.5 * (m_lo + m_hi);
    const double scale = std::max({m_lo, m_hi, 1e-30});
    if (std::abs(m_mid - lin) > 1e-11 * scale && depth < 48) {
        const double mid = 0.5 * (lo + hi);
        return integrate_kernel_piece(mc, a_u, b_u, u0, mu_p, lo, mid, depth + 1) +
               integrate_kernel_piece(mc, a_u, b_u, u0, mu_p, mid, hi, depth + 1);
    }
    // mu(t) = c + d t on [lo,hi]
    const double d = (m_hi - m_lo) / (hi - lo);
    const double c = m_lo - d * lo;
    // (u(t) - u0) * 1 part
    const double a = a_u - u0;
    double total = (a + b_u * 0.5 * (lo + hi)) * (hi - lo);
    total += mu_p * affine_over_affine_integral(a, b_u, c, d, lo, hi);
    return total;
}

}  // namespace graph_detail

// exact SAMV of a piecewise-linear vertex function on a metric graph
inline double graph_samv(const MetricGraph& g, const GraphField& u, const GraphPoint& p, double r) {
    const double mu_p = graph_ball_measure(g, p, r);
    if (!(mu_p > 0.0)) throw rejected_input("graph_samv: empty ball");
    const double u0 = u.at(g, p);
    const vec dp = g.distances_to_vertices(p);

    double total = 0.0;
    // atoms
    for (std::size_t j = 0; j < g.vertices.size(); ++j) {
        if (dp[j] < r && g.vertices[j].atom > 0.0) {
            const double mu_j = graph_ball_measure(g, GraphPoint::at_vertex(static_cast<int>(j)), r);
            total += g.vertices[j].atom * (u.vertex_values[j] - u0) * (1.0 + mu_p / mu_j);
        }
    }
    // edges
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const GraphEdge& ed = g.edges[e];
        auto cover = graph_detail::edge_coverage(g, dp, p, static_cast<int>(e), r);
        const auto pieces = cover.merged();
        if (pieces.empty()) continue;
        const double uu = u.vertex_values[static_cast<std::size_t>(ed.u)];
        const double uv = u.vertex_values[static_cast<std::size_t>(ed.v)];
        const double b_u = (uv - uu) / ed.length;
        graph_detail::MovingCenter mc{&g, static_cast<int>(e), -1, r};
        for (const auto& [lo, hi] : pieces) {
            const vec bps = mc.breakpoints(lo, hi);
            for (std::size_t k = 0; k + 1 < bps.size(); ++k)
                if (bps[k + 1] > bps[k])
                    total += graph_detail::integrate_kernel_piece(mc, uu, b_u, u0, mu_p, bps[k], bps[k + 1]);
        }
    }
    // rays (u constant along the ray)
    for (std::size_t rr = 0; rr < g.rays.size(); ++rr) {
        auto cover = graph_detail::ray_coverage(g, dp, p, static_cast<int>(rr), r);
        const auto pieces = cover.merged();
        if (pieces.empty()) continue;
        const double ub = u.vertex_values[static_cast<std::size_t>(g.rays[rr].base)];
        graph_detail::MovingCenter mc{&g, -1, static_cast<int>(rr), r};
        for (const auto& [lo, hi] : pieces) {
            const vec bps = mc.breakpoints(lo, hi);
            for (std::size_t k = 0; k + 1 < bps.size(); ++k)
                if (bps[k + 1] > bps[k])
                    total += graph_detail::integrate_kernel_piece(mc, ub, 0.0, u0, mu_p, bps[k], bps[k + 1]);
        }
    }
    return total / (2.0 * r * r * mu_p);
}

// ---------------------------------------------------------------------------
// comparability scans
// ---------------------------------------------------------------------------

struct ComparabilityRow {
    double r = 0.0;
    double C = 1.0;  // max over scanned pairs of mu(B_r(x))/mu(B_r(y)), y in B_r(x)
};

inline std::vector<GraphPoint> graph_scan_points(const MetricGraph& g, double h, double ray_horizon) {
    std::vector<GraphPoint> pts;
    for (std::size_t j = 0; j < g.vertices.size(); ++j) pts.push_back(GraphPoint::at_vertex(static_cast<int>(j)));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const double L = g.edges[e].length;
        const int k = std::max(2, static_cast<int>(L / h));
        for (int j = 1; j < k; ++j) pts.push_back(GraphPoint::on_edge(static_cast<int>(e), L * j / k));
    }
    for (std::size_t rr = 0; rr < g.rays.size(); ++rr) {
        const int k = std::max(2, static_cast<int>(ray_horizon / h));
        for (int j = 1; j < k; ++j) pts.push_back(GraphPoint::on_ray(static_cast<int>(rr), ray_horizon * j / k));
    }
    return pts;
}

// empirical comparability constants per radius; scan points are vertices plus
// edge points at resolution h (default min edge length / 16)
inline std::vector<ComparabilityRow> comparability_scan(const MetricGraph& g, cspan radii,
                                                        double h = 0.0) {
    if (!g.finalized()) throw rejected_input("comparability_scan: graph not finalized");
    std::vector<ComparabilityRow> out;
    for (double r : radii) {
        const double step = h > 0.0 ? h : std::min(g.min_edge_length(), 2.0 * r) / 16.0;
        const auto pts = graph_scan_points(g, step, 2.0 * r);
        vec mus(pts.size());
        std::vector<vec> dtables(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            mus[i] = graph_ball_measure(g, pts[i], r);
            dtables[i] = g.distances_to_vertices(pts[i]);
        }
        auto pair_distance = [&](std::size_t i, std::size_t j) {
            const GraphPoint& q = pts[j];
            const vec& dp = dtables[i];
            double best = std::numeric_limits<double>::infinity();
            switch (q.kind) {
                case GraphPoint::Kind::vertex: best = dp[static_cast<std::size_t>(q.index)]; break;
                case GraphPoint::Kind::edge: {
                    const GraphEdge& e = g.edges[static_cast<std::size_t>(q.index)];
                    best = std::min(dp[static_cast<std::size_t>(e.u)] + q.offset,
                                    dp[static_cast<std::size_t>(e.v)] + e.length - q.offset);
                    if (pts[i].kind == GraphPoint::Kind::edge && pts[i].index == q.index)
                        best = std::min(best, std::abs(pts[i].offset - q.offset));
                    break;
                }
                case GraphPoint::Kind::ray: {
                    best = dp[static_cast<std::size_t>(g.rays[static_cast<std::size_t>(q.index)].base)] + q.offset;
                    if (pts[i].kind == GraphPoint::Kind::ray && pts[i].index == q.index)
                        best = std::min(best, std::abs(pts[i].offset - q.offset));
                    break;
                }
            }
            return best;
        };
        ComparabilityRow row;
        row.r = r;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (i == j) continue;
                if (pair_distance(i, j) < r) row.C = std::max(row.C, mus[i] / mus[j]);
            }
        out.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// finite atomic spaces: exact operator matrices
// ---------------------------------------------------------------------------

struct AtomicSpace {
    Eigen::MatrixXd dist;  // symmetric distance matrix
    vec mass;

    int size() const { return static_cast<int>(mass.size()); }

    void validate() const {
        const int m = size();
        if (m < 1) throw rejected_input("AtomicSpace: empty point list");
        if (dist.rows() != m || dist.cols() != m) throw rejected_input("AtomicSpace: distance matrix size mismatch");
        for (int i = 0; i < m; ++i) {
            if (dist(i, i) != 0.0) throw rejected_input("AtomicSpace: nonzero diagonal");
            if (!(mass[static_cast<std::size_t>(i)] > 0.0)) throw rejected_input("AtomicSpace: masses must be positive");
            for (int j = 0; j < m; ++j) {
                if (dist(i, j) != dist(j, i)) throw rejected_input("AtomicSpace: asymmetric distances");
                if (i != j && !(dist(i, j) > 0.0)) throw rejected_input("AtomicSpace: distinct points need positive distance");
            }
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    if (dist(i, k) > dist(i, j) + dist(j, k) + 1e-12)
                        throw rejected_input("AtomicSpace: triangle inequality violated");
    }

    double ball_measure(int i, double r) const {
        double mu = 0.0;
        for (int j = 0; j < size(); ++j)
            if (dist(i, j) < r) mu += mass[static_cast<std::size_t>(j)];
        return mu;
    }
};

struct AtomicOperators {
    Eigen::MatrixXd averaging;  // A_r
    Eigen::MatrixXd adjoint;    // A_r^*
    Eigen::MatrixXd amv;        // (A_r - I)/r^2
    Eigen::MatrixXd samv;       // symmetrized kernel applied to differences
};

inline AtomicOperators atomic_operator_matrices(const AtomicSpace& a, double r) {
    a.validate();
    if (!(r > 0.0)) throw rejected_input("atomic_operator_matrices: radius must be positive");
    const int m = a.size();
    vec mu(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) mu[static_cast<std::size_t>(i)] = a.ball_measure(i, r);
    AtomicOperators ops;
    ops.averaging = Eigen::MatrixXd::Zero(m, m);
    ops.adjoint = Eigen::MatrixXd::Zero(m, m);
    ops.samv = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (!(a.dist(i, j) < r)) continue;
            const double mj = a.mass[static_cast<std::size_t>(j)];
            ops.averaging(i, j) = mj / mu[static_cast<std::size_t>(i)];
            ops.adjoint(i, j) = mj / mu[static_cast<std::size_t>(j)];
        }
    ops.amv = (ops.averaging - Eigen::MatrixXd::Identity(m, m)) / (r * r);
    for (int i = 0; i < m; ++i) {
        double diag = 0.0;
        for (int j = 0; j < m; ++j) {
            if (!(a.dist(i, j) < r)) continue;
            const double k = 0.5 / (r * r) *
                             (1.0 / mu[static_cast<std::size_t>(i)] + 1.0 / mu[static_cast<std::size_t>(j)]) *
                             a.mass[static_cast<std::size_t>(j)];
            ops.samv(i, j) += k;
            diag += k;
        }
        ops.samv(i, i) -= diag;
    }
    return ops;
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

// hub-and-spokes assembly: a circle of radius 1/n carrying n equally spaced
// rim vertices (arcs between consecutive rims), a spoke from the hub to each
// rim, unit atoms at the hub and rims, and the ambient line through the hub
// as two rays
inline MetricGraph circle_spokes(int n) {
    if (n < 1) throw rejected_input("circle_spokes: n must be >= 1");
    MetricGraph g;
    g.vertices.push_back({"hub", 1.0});
    for (int i = 0; i < n; ++i) g.vertices.push_back({"rim" + std::to_string(i), 1.0});
    const double spoke = 1.0 / n;
    for (int i = 0; i < n; ++i) g.edges.push_back({0, 1 + i, spoke});
    const double arc = 2.0 * pi / (static_cast<double>(n) * n);
    for (int i = 0; i < n; ++i) g.edges.push_back({1 + i, 1 + (i + 1) % n, arc});
    g.rays.push_back({0});
    g.rays.push_back({0});
    g.finalize();
    return g;
}

// three collinear unit-spaced points with prescribed masses
inline AtomicSpace three_point_line(const vec& masses) {
    if (masses.size() != 3) throw rejected_input("three_point_line: need exactly three masses");
    AtomicSpace a;
    a.mass = masses;
    a.dist = Eigen::MatrixXd::Zero(3, 3);
    a.dist(0, 1) = a.dist(1, 0) = 1.0;
    a.dist(1, 2) = a.dist(2, 1) = 1.0;
    a.dist(0, 2) = a.dist(2, 0) = 2.0;
    return a;
}

}  // namespace amvlab
