#pragma once

/// @file quadrature.hpp
/// @brief Gauss rules on segments, triangles, quads, tetrahedra and
/// hexahedra, and the subcell partitions used by each integration backend.
///
/// Partition counts per element (2D / 3D):
///
///     element     sm    lsm   xfem
///     standard    4/6   1/1   1/1 (2x2 / 2x2x2 Gauss on the element)
///     tip         5/24  5/24  5 triangles x 13 pts / 20 tets x 15 pts
///     split       8/12  8/12  8 triangles x 3 pts  / 12 tets x 5 pts
///
/// 2D split elements: the crack chord divides the quad into two convex
/// polygons, each fan-triangulated from its area centroid (4+4 or 3+5
/// triangles). 2D tip elements: the boundary ring is broken at the crack
/// entry point into five edges and fanned from the tip, so every triangle has
/// the tip as a vertex and the crack face is a shared edge.

#include "core.hpp"
#include "element.hpp"
#include "mesh.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace lsxfem {

template <int Dim>
struct QuadratureRule {
    std::vector<Vec<Dim>> points;  // reference coordinates
    std::vector<double> weights;   // reference measure

    std::size_t size() const { return points.size(); }
    double weight_sum() const {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
};

/// n-point Gauss-Legendre rule on [-1, 1].
inline QuadratureRule<1> gauss_legendre(int n) {
    if (n < 1) throw ArgumentError("Gauss-Legendre rule needs at least one point");
    QuadratureRule<1> rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1;
        dp = n * (x * p1 - p0) / (x * x - 1);
        const double w = 2 / ((1 - x * x) * dp * dp);
        rule.points[i] = Vec<1>(-x);
        rule.weights[i] = w;
        rule.points[n - 1 - i] = Vec<1>(x);
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.points[n / 2] = Vec<1>(0.0);
    return rule;
}

/// Tensor-product Gauss rule on [-1, 1]^Dim.
template <int Dim>
QuadratureRule<Dim> gauss_tensor(int n) {
    const auto g = gauss_legendre(n);
    QuadratureRule<Dim> rule;
    std::array<int, Dim> idx{};
    const int total = static_cast<int>(std::pow(n, Dim));
    for (int k = 0; k < total; ++k) {
        int r = k;
        for (int a = 0; a < Dim; ++a) {
            idx[a] = r % n;
            r /= n;
        }
        Vec<Dim> p;
        double w = 1;
        for (int a = 0; a < Dim; ++a) {
            p[a] = g.points[idx[a]][0];
            w *= g.weights[idx[a]];
        }
        rule.points.push_back(p);
        rule.weights.push_back(w);
    }
    return rule;
}

/// Grundmann-Moeller rule of degree 2s+1 on the unit simplex (measure 1/Dim!).
template <int Dim>
QuadratureRule<Dim> grundmann_moller(int s) {
    const int d = 2 * s + 1;
    QuadratureRule<Dim> rule;
    auto factorial = [](int k) {
        double f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    for (int i = 0; i <= s; ++i) {
        const double denom = d + Dim - 2 * i;
        const double w = (i % 2 ? -1.0 : 1.0) * std::pow(2.0, -2 * s) * std::pow(denom, d) /
                         (factorial(i) * factorial(d + Dim - i));
        // all beta in N^{Dim+1} with |beta| = s - i
        const int total = s - i;
        std::array<int, Dim + 1> beta{};
        auto emit = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == Dim) {
                beta[Dim] = remaining;
                Vec<Dim> p;
                for (int a = 0; a < Dim; ++a) p[a] = (2 * beta[a] + 1) / denom;
                rule.points.push_back(p);
                rule.weights.push_back(w);
                return;
            }
            for (int b = 0; b <= remaining; ++b) {
                beta[pos] = b;
                self(self, pos + 1, remaining - b);
            }
        };
        emit(emit, 0, total);
    }
    return rule;
}

enum class TriangleOrder { Low, High13 };

/// Rules on the reference triangle (0,0)-(1,0)-(0,1): `Low` is the 3-point
/// degree-2 rule, `High13` the 13-point degree-7 rule.
inline const QuadratureRule<2>& triangle_rule(TriangleOrder order) {
    static const QuadratureRule<2> low = [] {
        QuadratureRule<2> r;
        r.points = {Vec2(1.0 / 6, 1.0 / 6), Vec2(2.0 / 3, 1.0 / 6), Vec2(1.0 / 6, 2.0 / 3)};
        r.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
        return r;
    }();
    static const QuadratureRule<2> high = [] {
        QuadratureRule<2> r;
        auto add = [&](double l1, double l2, double w) {
            r.points.emplace_back(l1, l2);
            r.weights.push_back(0.5 * w);
        };
        auto add3 = [&](double a, double b, double w) {
            add(a, a, w);
            add(a, b, w);
            add(b, a, w);
        };
        auto add6 = [&](double a, double b, double c, double w) {
            add(a, b, w);
            add(b, a, w);
            add(a, c, w);
            add(c, a, w);
            add(b, c, w);
            add(c, b, w);
        };
        add(1.0 / 3, 1.0 / 3, -0.149570044467682);
        add3(0.260345966079040, 0.479308067841920, 0.175615257433208);
        add3(0.065130102902216, 0.869739794195568, 0.053347235608838);
        add6(0.048690315425316, 0.312865496004874, 0.638444188569810, 0.077113760890257);
        return r;
    }();
    return order == TriangleOrder::Low ? low : high;
}

/// 4-point degree-2 rule on the unit tetrahedron.
inline const QuadratureRule<3>& tet_rule4() {
    static const QuadratureRule<3> r = [] {
        QuadratureRule<3> q;
        const double a = (5 - std::sqrt(5.0)) / 20, b = (5 + 3 * std::sqrt(5.0)) / 20;
        q.points = {Vec3(a, a, a), Vec3(b, a, a), Vec3(a, b, a), Vec3(a, a, b)};
        q.weights.assign(4, 1.0 / 24);
        return q;
    }();
    return r;
}

// ---------------------------------------------------------------------------
// Subcells
// ---------------------------------------------------------------------------

enum class CellKind { Triangle, Quad, Tet, Hex };

template <int Dim>
struct SubcellFace {
    std::vector<Vec<Dim>> vertices;
    Vec<Dim> normal;  // outward unit normal (face centre for curved quads)
    double measure;
};

/// Integration-only subdivision of an element. Triangles and quads are
/// counter-clockwise, tetrahedra positively oriented, hexahedra in the
/// parent-element node order.
template <int Dim>
struct Subcell {
    int parent = -1;
    CellKind kind;
    std::vector<Vec<Dim>> vertices;
    /// Side of the crack this cell lies on (+1/-1), 0 for uncut elements.
    int side = 0;

    Vec<Dim> centroid() const;
    double measure() const;
    std::vector<SubcellFace<Dim>> faces() const;
    /// measure / diameter^Dim, proportional to thickness over length for slivers.
    double shape_quality() const {
        const double d = diameter();
        return measure() / std::pow(d, Dim);
    }
    /// Longest vertex-to-vertex distance.
    double diameter() const {
        double d = 0;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, (vertices[i] - vertices[j]).norm());
        return d;
    }
};

namespace detail {

// both relative to p[0] to keep thin polygons far from the origin accurate
inline double polygon_area(const std::vector<Vec2>& p) {
    double a = 0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) a += cross2(p[i] - p[0], p[i + 1] - p[0]);
    return 0.5 * a;
}

inline Vec2 polygon_centroid(const std::vector<Vec2>& p) {
    double a = 0;
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const Vec2 u = p[i] - p[0];
        const Vec2 v = p[i + 1] - p[0];
        const double w = cross2(u, v);
        a += w;
        c += w * (u + v);
    }
    return p[0] + c / (3 * a);
}

inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// outward-ordered hex faces: (v1-v0) x (v3-v0) points outward
inline constexpr std::array<std::array<int, 4>, 6> kHexFaces{
    {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}}};

}  // namespace detail

template <>
inline Vec2 Subcell<2>::centroid() const {
    return detail::polygon_centroid(vertices);
}
template <>
inline double Subcell<2>::measure() const {
    return detail::polygon_area(vertices);
}
template <>
inline std::vector<SubcellFace<2>> Subcell<2>::faces() const {
    std::vector<SubcellFace<2>> f;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % vertices.size()];
        const Vec2 d = b - a;
        const double len = d.norm();
        f.push_back({{a, b}, Vec2(d.y(), -d.x()) / len, len});
    }
    return f;
}

template <>
inline double Subcell<3>::measure() const {
    if (kind == CellKind::Tet) return detail::tet_volume(vertices[0], vertices[1], vertices[2], vertices[3]);
    const auto g = gauss_tensor<3>(2);
    const Hex8 hex(Hex8::Coords{vertices[0], vertices[1], vertices[2], vertices[3], vertices[4], vertices[5],
                                vertices[6], vertices[7]});
    double v = 0;
    for (std::size_t q = 0; q < g.size(); ++q) v += g.weights[q] * hex.jacobian(g.points[q]).determinant();
    return v;
}
template <>
inline Vec3 Subcell<3>::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& v : vertices) c += v;
    return c / static_cast<double>(vertices.size());
}
template <>
inline std::vector<SubcellFace<3>> Subcell<3>::faces() const {
    std::vector<SubcellFace<3>> f;
    if (kind == CellKind::Tet) {
        static constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
        for (const auto& t : kTetFaces) {
            const Vec3 a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
            const Vec3 n = (b - a).cross(c - a);
            f.push_back({{a, b, c}, n.normalized(), 0.5 * n.norm()});
        }
    } else {
        for (const auto& q : detail::kHexFaces) {
            const Vec3 a = vertices[q[0]], b = vertices[q[1]], c = vertices[q[2]], d = vertices[q[3]];
            const Vec3 n = (c - a).cross(d - b);  // diagonal cross product: 2 x vector area
            f.push_back({{a, b, c, d}, n.normalized(), 0.5 * n.norm()});
        }
    }
    return f;
}

/// Point with its physical weight and, on boundaries, the outward normal.
template <int Dim>
struct IntegrationPoint {
    Vec<Dim> x;
    double weight;
    Vec<Dim> normal = Vec<Dim>::Zero();
};

/// Boundary rule: 2-point Gauss per segment (2D), 3-point rule per triangular
/// face and 2x2 Gauss per quadrilateral face (3D).
template <int Dim>
std::vector<IntegrationPoint<Dim>> boundary_points(const Subcell<Dim>& cell);

template <>
inline std::vector<IntegrationPoint<2>> boundary_points(const Subcell<2>& cell) {
    const auto g = gauss_legendre(2);
    std::vector<IntegrationPoint<2>> pts;
    for (const auto& f : cell.faces()) {
        for (std::size_t q = 0; q < g.size(); ++q) {
            const double t = 0.5 * (1 + g.points[q][0]);
            pts.push_back({(1 - t) * f.vertices[0] + t * f.vertices[1], 0.5 * g.weights[q] * f.measure, f.normal});
        }
    }
    return pts;
}

template <>
inline std::vector<IntegrationPoint<3>> boundary_points(const Subcell<3>& cell) {
    std::vector<IntegrationPoint<3>> pts;
    if (cell.kind == CellKind::Tet) {
        const auto& tri = triangle_rule(TriangleOrder::Low);
        for (const auto& f : cell.faces())
            for (std::size_t q = 0; q < tri.size(); ++q) {
                const Vec2 l = tri.points[q];
                const Vec3 x = (1 - l.x() - l.y()) * f.vertices[0] + l.x() * f.vertices[1] + l.y() * f.vertices[2];
                pts.push_back({x, 2 * tri.weights[q] * f.measure, f.normal});
            }
        return pts;
    }
    const auto g = gauss_tensor<2>(2);
    for (const auto& f : cell.faces()) {
        for (std::size_t q = 0; q < g.size(); ++q) {
            const auto n = ParentElement<2>::shape(g.points[q]);
            const auto dn = ParentElement<2>::shape_derivatives(g.points[q]);
            Vec3 x = Vec3::Zero(), t1 = Vec3::Zero(), t2 = Vec3::Zero();
            for (int a = 0; a < 4; ++a) {
                x += n[a] * f.vertices[a];
                t1 += dn(0, a) * f.vertices[a];
                t2 += dn(1, a) * f.vertices[a];
            }
            const Vec3 area = t1.cross(t2);
            pts.push_back({x, g.weights[q] * area.norm(), area.normalized()});
        }
    }
    return pts;
}

/// Interior rule used for a subcell, in physical coordinates.
enum class InteriorRule {
    Centroid,      // one point, weight = measure
    Low,           // 3-pt triangle / 4-pt tet / 2x2 quad / 2x2x2 hex
    SplitXfem,     // 3-pt triangle / 5-pt tet
    TipXfem,       // 13-pt triangle / 15-pt tet
};

template <int Dim>
std::vector<IntegrationPoint<Dim>> interior_points(const Subcell<Dim>& cell, InteriorRule rule) {
    std::vector<IntegrationPoint<Dim>> pts;
    if (rule == InteriorRule::Centroid) {
        pts.push_back({cell.centroid(), cell.measure()});
        return pts;
    }
    if (cell.kind == CellKind::Triangle || cell.kind == CellKind::Tet) {
        QuadratureRule<Dim> q;
        if constexpr (Dim == 2) {
            q = triangle_rule(rule == InteriorRule::TipXfem ? TriangleOrder::High13 : TriangleOrder::Low);
        } else {
            if (rule == InteriorRule::Low)
                q = tet_rule4();
            else
                q = grundmann_moller<3>(rule == InteriorRule::TipXfem ? 2 : 1);
        }
        const double jac = cell.measure() * (Dim == 2 ? 2.0 : 6.0);
        for (std::size_t k = 0; k < q.size(); ++k) {
            Vec<Dim> x = cell.vertices[0];
            for (int a = 0; a < Dim; ++a) x += q.points[k][a] * (cell.vertices[a + 1] - cell.vertices[0]);
            pts.push_back({x, q.weights[k] * jac});
        }
        return pts;
    }
    // quad / hex: tensor Gauss through the multilinear map of the cell
    typename ParentElement<Dim>::Coords c;
    for (int a = 0; a < ParentElement<Dim>::kNodes; ++a) c[a] = cell.vertices[a];
    const IsoElement<Dim> iso(c);
    const auto g = gauss_tensor<Dim>(2);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double det = iso.jacobian(g.points[k]).determinant();
        if (!(det > 0)) throw GeometryError("degenerate subcell");
        pts.push_back({iso.map(g.points[k]), g.weights[k] * det});
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Partitions
// ---------------------------------------------------------------------------

/// Subdivides a quad into nx x ny congruent (in the parent domain) subquads.
inline std::vector<Subcell<2>> partition_quad(const Quad4::Coords& x, int nx, int ny, int parent = -1) {
    const Quad4 q(x);
    std::vector<Subcell<2>> cells;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x0 = -1 + 2.0 * i / nx, x1 = -1 + 2.0 * (i + 1) / nx;
            const double y0 = -1 + 2.0 * j / ny, y1 = -1 + 2.0 * (j + 1) / ny;
            Subcell<2> c;
            c.parent = parent;
            c.kind = CellKind::Quad;
            c.vertices = {q.map(Vec2(x0, y0)), q.map(Vec2(x1, y0)), q.map(Vec2(x1, y1)), q.map(Vec2(x0, y1))};
            cells.push_back(std::move(c));
        }
    return cells;
}

namespace detail {

inline bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol) {
    return point_segment_distance(p, a, b) <= tol;
}

inline void fan(const std::vector<Vec2>& poly, const Vec2& apex, int side, int parent, std::vector<Subcell<2>>& out) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Subcell<2> c;
        c.parent = parent;
        c.kind = CellKind::Triangle;
        c.vertices = {apex, poly[i], poly[(i + 1) % poly.size()]};
        c.side = side;
        out.push_back(std::move(c));
    }
}

}  // namespace detail

/// Partitions one 2D element for the given backend.
///
/// `cut` must be present for Split and Tip elements; `crack` supplies the
/// side of each subcell on cut elements.
inline std::vector<Subcell<2>> partition(const Quad4::Coords& x, ElementTag tag, const std::optional<ElementCut>& cut,
                                         Method method, const CrackGeometry& crack, int parent = -1) {
    if (tag == ElementTag::Standard) {
        if (method == Method::Sm) return partition_quad(x, 2, 2, parent);
        return partition_quad(x, 1, 1, parent);
    }
    if (!cut) throw GeometryError("cut element without crack intersection data");
    const double scale = (x[2] - x[0]).norm();
    const double tol = 1e-8 * scale;
    auto check_on_edge = [&](const Vec2& p, int edge) {
        if (edge < 0 || edge > 3 || !detail::on_segment(p, x[edge], x[(edge + 1) % 4], tol))
            throw GeometryError("crack intersection point is not on the stated element edge");
    };
    std::vector<Subcell<2>> cells;
    if (tag == ElementTag::Split) {
        check_on_edge(cut->entry, cut->entry_edge);
        check_on_edge(cut->exit, cut->exit_edge);
        if (cut->entry_edge == cut->exit_edge) throw GeometryError("split element entered and left through one edge");
        std::vector<Vec2> left{cut->exit};
        for (int k = cut->exit_edge + 1;; ++k) {
            left.push_back(x[k % 4]);
            if (k % 4 == cut->entry_edge) break;
        }
        left.push_back(cut->entry);
        std::vector<Vec2> right{cut->entry};
        for (int k = cut->entry_edge + 1;; ++k) {
            right.push_back(x[k % 4]);
            if (k % 4 == cut->exit_edge) break;
        }
        right.push_back(cut->exit);
        detail::fan(left, detail::polygon_centroid(left), +1, parent, cells);
        detail::fan(right, detail::polygon_centroid(right), -1, parent, cells);
        return cells;
    }
    // Tip element
    check_on_edge(cut->entry, cut->entry_edge);
    if (!detail::strictly_inside(cut->exit, x)) throw GeometryError("tip element whose tip lies outside the element");
    std::vector<Vec2> ring{cut->entry};
    for (int k = cut->entry_edge + 1; k <= cut->entry_edge + 4; ++k) ring.push_back(x[k % 4]);
    detail::fan(ring, cut->exit, 0, parent, cells);
    for (auto& c : cells) c.side = signed_distance(crack, c.centroid()) < 0 ? -1 : 1;
    return cells;
}

/// Interior rule a backend uses on a subcell of an element with the given tag.
inline InteriorRule interior_rule_for(Method method, ElementTag tag) {
    switch (method) {
        case Method::Sm: return InteriorRule::Centroid;
        case Method::Lsm: return InteriorRule::Low;
        case Method::Xfem:
            if (tag == ElementTag::Tip) return InteriorRule::TipXfem;
            if (tag == ElementTag::Split) return InteriorRule::SplitXfem;
            return InteriorRule::Low;
    }
    return InteriorRule::Low;
}

// ---------------------------------------------------------------------------
// 3D partitions
// ---------------------------------------------------------------------------

/// Planar crack in an axis-aligned hex mesh: the crack lies on
/// x[normal_axis] = plane and occupies x[front_axis] < front.
struct PlanarCrack3 {
    int normal_axis = 1;
    double plane = 0;
    int front_axis = 0;
    double front = 0;
};

namespace detail {

inline Subcell<3> make_tet(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int parent, int side) {
    Subcell<3> t;
    t.parent = parent;
    t.kind = CellKind::Tet;
    t.side = side;
    if (tet_volume(a, b, c, d) >= 0)
        t.vertices = {a, b, c, d};
    else
        t.vertices = {a, c, b, d};
    return t;
}

inline std::array<Vec3, 8> box_corners(const Vec3& lo, const Vec3& hi) {
    std::array<Vec3, 8> c;
    for (int a = 0; a < 8; ++a)
        for (int k = 0; k < 3; ++k) c[a][k] = ParentElement<3>::kCorners[a][k] < 0 ? lo[k] : hi[k];
    return c;
}

}  // namespace detail

/// Kuhn subdivision of a hexahedron into six tetrahedra sharing the 0-6 diagonal.
inline std::vector<Subcell<3>> kuhn_tets(const std::array<Vec3, 8>& v, int parent = -1, int side = 0) {
    static constexpr std::array<std::array<int, 4>, 6> kTets{
        {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}}};
    std::vector<Subcell<3>> cells;
    for (const auto& t : kTets) cells.push_back(detail::make_tet(v[t[0]], v[t[1]], v[t[2]], v[t[3]], parent, side));
    return cells;
}

/// Five-tetrahedron decomposition of a hexahedron.
inline std::vector<Subcell<3>> five_tets(const std::array<Vec3, 8>& v, int parent = -1, int side = 0) {
    static constexpr std::array<std::array<int, 4>, 5> kTets{
        {{0, 1, 3, 4}, {1, 2, 3, 6}, {1, 4, 5, 6}, {3, 4, 6, 7}, {1, 3, 4, 6}}};
    std::vector<Subcell<3>> cells;
    for (const auto& t : kTets) cells.push_back(detail::make_tet(v[t[0]], v[t[1]], v[t[2]], v[t[3]], parent, side));
    return cells;
}

/// Partitions an axis-aligned hexahedron for the given backend. Split
/// elements are cut by the crack plane into two sub-hexes, tip elements by
/// the plane and the front into four; sub-hexes are tetrahedralized (Kuhn
/// for smoothing, five tets for conventional XFEM on tip elements).
inline std::vector<Subcell<3>> partition(const Hex8::Coords& x, ElementTag tag, Method method,
                                         const PlanarCrack3& crack = {}, int parent = -1) {
    std::array<Vec3, 8> v;
    std::copy(x.begin(), x.end(), v.begin());
    if (tag == ElementTag::Standard) {
        if (method == Method::Sm) return kuhn_tets(v, parent);
        Subcell<3> h;
        h.parent = parent;
        h.kind = CellKind::Hex;
        h.vertices.assign(v.begin(), v.end());
        return {h};
    }
    Vec3 lo = x[0], hi = x[0];
    for (const auto& p : x) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const int na = crack.normal_axis, fa = crack.front_axis;
    if (!(crack.plane > lo[na] && crack.plane < hi[na]))
        throw GeometryError("crack plane does not cut the element");
    const bool tip = tag == ElementTag::Tip;
    if (tip && !(crack.front > lo[fa] && crack.front < hi[fa]))
        throw GeometryError("tip element whose crack front lies outside the element");

    std::vector<std::pair<Vec3, Vec3>> boxes;  // (lo, hi)
    std::vector<int> sides;
    std::vector<double> cuts_n{lo[na], crack.plane, hi[na]};
    std::vector<double> cuts_f = tip ? std::vector<double>{lo[fa], crack.front, hi[fa]} : std::vector<double>{lo[fa], hi[fa]};
    for (std::size_t i = 0; i + 1 < cuts_n.size(); ++i)
        for (std::size_t j = 0; j + 1 < cuts_f.size(); ++j) {
            Vec3 blo = lo, bhi = hi;
            blo[na] = cuts_n[i];
            bhi[na] = cuts_n[i + 1];
            blo[fa] = cuts_f[j];
            bhi[fa] = cuts_f[j + 1];
            boxes.emplace_back(blo, bhi);
            sides.push_back(i == 0 ? -1 : 1);
        }
    std::vector<Subcell<3>> cells;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        const auto c = detail::box_corners(boxes[b].first, boxes[b].second);
        auto tets = (tip && method == Method::Xfem) ? five_tets(c, parent, sides[b]) : kuhn_tets(c, parent, sides[b]);
        cells.insert(cells.end(), tets.begin(), tets.end());
    }
    return cells;
}

/// Interior integration points of one element, summed over its subcells.
template <int Dim>
int interior_point_count(const std::vector<Subcell<Dim>>& cells, Method method, ElementTag tag) {
    int n = 0;
    for (const auto& c : cells) n += static_cast<int>(interior_points(c, interior_rule_for(method, tag)).size());
    return n;
}

}  // namespace lsxfem
