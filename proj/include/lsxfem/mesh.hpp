#pragma once

/// @file mesh.hpp
/// @brief Structured meshes, piecewise-linear crack geometry and the
/// classification of elements into standard, split and tip elements.

#include "core.hpp"
#include "element.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace lsxfem {

template <int Dim>
struct Box {
    Vec<Dim> lo;
    Vec<Dim> hi;

    Vec<Dim> size() const { return hi - lo; }
    bool contains(const Vec<Dim>& p, double tol = 0) const {
        return ((p - lo).array() >= -tol).all() && ((hi - p).array() >= -tol).all();
    }
};

/// Axis-aligned structured grid of quads (2D) or hexes (3D).
/// Nodes are ordered row-major with x fastest.
template <int Dim>
struct StructuredMesh {
    using Connectivity = std::array<int, ParentElement<Dim>::kNodes>;

    std::vector<Vec<Dim>> nodes;
    std::vector<Connectivity> elements;
    std::array<int, Dim> divisions{};
    Box<Dim> extents;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }

    double spacing(int axis) const { return extents.size()[axis] / divisions[axis]; }

    /// Characteristic element size (largest edge length).
    double element_size() const {
        double h = 0;
        for (int a = 0; a < Dim; ++a) h = std::max(h, spacing(a));
        return h;
    }

    typename ParentElement<Dim>::Coords element_coords(int e) const {
        typename ParentElement<Dim>::Coords c;
        for (int a = 0; a < ParentElement<Dim>::kNodes; ++a) c[a] = nodes[elements[e][a]];
        return c;
    }

    IsoElement<Dim> element(int e) const { return IsoElement<Dim>(element_coords(e)); }

    /// Element containing p (clamped to the grid); nullopt if p is outside the box.
    std::optional<int> locate(const Vec<Dim>& p) const {
        if (!extents.contains(p)) return std::nullopt;
        int index = 0;
        int stride = 1;
        for (int a = 0; a < Dim; ++a) {
            int i = static_cast<int>(std::floor((p[a] - extents.lo[a]) / spacing(a)));
            i = std::clamp(i, 0, divisions[a] - 1);
            index += i * stride;
            stride *= divisions[a];
        }
        return index;
    }
};

using StructuredMesh2 = StructuredMesh<2>;
using StructuredMesh3 = StructuredMesh<3>;

inline StructuredMesh2 build_structured_mesh(const Box<2>& extents, int nx, int ny) {
    if (nx < 1 || ny < 1) throw ArgumentError("structured mesh needs at least one division per axis");
    if (!((extents.hi - extents.lo).array() > 0).all()) throw ArgumentError("degenerate mesh extents");
    StructuredMesh2 m;
    m.divisions = {nx, ny};
    m.extents = extents;
    const double hx = (extents.hi.x() - extents.lo.x()) / nx;
    const double hy = (extents.hi.y() - extents.lo.y()) / ny;
    m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes.emplace_back(i == nx ? extents.hi.x() : extents.lo.x() + i * hx,
                                 j == ny ? extents.hi.y() : extents.lo.y() + j * hy);
    m.elements.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n0 = j * (nx + 1) + i;
            m.elements.push_back({n0, n0 + 1, n0 + nx + 2, n0 + nx + 1});
        }
    return m;
}

inline StructuredMesh3 build_structured_mesh(const Box<3>& extents, int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1) throw ArgumentError("structured mesh needs at least one division per axis");
    if (!((extents.hi - extents.lo).array() > 0).all()) throw ArgumentError("degenerate mesh extents");
    StructuredMesh3 m;
    m.divisions = {nx, ny, nz};
    m.extents = extents;
    const Vec3 h = (extents.hi - extents.lo).cwiseQuotient(Vec3(nx, ny, nz));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                m.nodes.emplace_back(extents.lo + Vec3(i * h.x(), j * h.y(), k * h.z()));
    const int sx = nx + 1;
    const int sxy = (nx + 1) * (ny + 1);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int n0 = k * sxy + j * sx + i;
                m.elements.push_back({n0, n0 + 1, n0 + sx + 1, n0 + sx, n0 + sxy, n0 + sxy + 1, n0 + sxy + sx + 1,
                                      n0 + sxy + sx});
            }
    return m;
}

// ---------------------------------------------------------------------------
// Crack geometry
// ---------------------------------------------------------------------------

/// Crack tip with its local frame. The tangent points out of the cracked
/// material, along the direction the crack would extend.
struct CrackTip {
    Vec2 point;
    Vec2 tangent;
    /// Orientation of the tip frame relative to the crack's travel direction:
    /// +1 for the end tip, -1 for the start tip. Converts global side signs
    /// (left of travel = +) into the tip's local upper/lower face.
    int orientation = 1;

    Vec2 normal() const { return perp(tangent); }
};

/// Piecewise-linear crack. Each end is either a tip or lies on/outside the
/// domain boundary.
class CrackGeometry {
public:
    CrackGeometry() = default;

    CrackGeometry(std::vector<Vec2> vertices, bool start_is_tip, bool end_is_tip)
        : vertices_(std::move(vertices)), start_is_tip_(start_is_tip), end_is_tip_(end_is_tip) {
        if (vertices_.size() < 2) throw ArgumentError("crack polyline needs at least two vertices");
        for (std::size_t i = 0; i + 1 < vertices_.size(); ++i)
            if ((vertices_[i + 1] - vertices_[i]).norm() == 0) throw ArgumentError("zero-length crack segment");
        check_simple();
    }

    static CrackGeometry segment(const Vec2& a, const Vec2& b, bool a_is_tip, bool b_is_tip) {
        return CrackGeometry({a, b}, a_is_tip, b_is_tip);
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    int segment_count() const { return static_cast<int>(vertices_.size()) - 1; }
    bool start_is_tip() const { return start_is_tip_; }
    bool end_is_tip() const { return end_is_tip_; }
    bool empty() const { return vertices_.empty(); }

    std::vector<CrackTip> tips() const {
        std::vector<CrackTip> t;
        if (start_is_tip_) {
            const Vec2 d = (vertices_[0] - vertices_[1]).normalized();
            t.push_back({vertices_[0], d, -1});
        }
        if (end_is_tip_) {
            const std::size_t n = vertices_.size();
            const Vec2 d = (vertices_[n - 1] - vertices_[n - 2]).normalized();
            t.push_back({vertices_[n - 1], d, +1});
        }
        return t;
    }

    /// Vertex index that carries tip i.
    std::size_t tip_vertex(int tip) const {
        if (start_is_tip_ && tip == 0) return 0;
        return vertices_.size() - 1;
    }

    std::vector<Vec2>& mutable_vertices() { return vertices_; }

private:
    void check_simple() const {
        const int n = segment_count();
        for (int i = 0; i < n; ++i)
            for (int j = i + 2; j < n; ++j) {
                const Vec2 a = vertices_[i], b = vertices_[i + 1];
                const Vec2 c = vertices_[j], d = vertices_[j + 1];
                const double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a);
                const double d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
                if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
                    throw ArgumentError("crack polyline self-intersects");
            }
    }

    std::vector<Vec2> vertices_;
    bool start_is_tip_ = false;
    bool end_is_tip_ = false;
};

namespace detail {

/// Distance from p to segment [a, b] and the clamped parameter.
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* t_out = nullptr) {
    const Vec2 d = b - a;
    const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    if (t_out) *t_out = t;
    return (a + t * d - p).norm();
}

}  // namespace detail

/// Signed distance to the crack line, extended beyond its two ends.
/// Positive on the left of the direction of travel.
inline double signed_distance(const CrackGeometry& crack, const Vec2& x) {
    if (crack.empty()) throw ArgumentError("signed distance of an empty crack");
    const auto& v = crack.vertices();
    const int n = crack.segment_count();
    double best = std::numeric_limits<double>::infinity();
    double sign = 1;
    for (int s = 0; s < n; ++s) {
        const Vec2 a = v[s], b = v[s + 1];
        const Vec2 d = b - a;
        double t = (x - a).dot(d) / d.squaredNorm();
        if (s > 0) t = std::max(t, 0.0);
        if (s < n - 1) t = std::min(t, 1.0);
        const double dist = (a + t * d - x).norm();
        if (dist < best) {
            best = dist;
            sign = cross2(d, x - a) >= 0 ? 1.0 : -1.0;
        }
    }
    return best == 0 ? 0.0 : sign * best;
}

struct PolarCoords {
    double r;
    double theta;
};

/// Polar coordinates of x about tip `tip`, theta measured counter-clockwise
/// from the tip tangent, in (-pi, pi].
inline PolarCoords tip_polar(const CrackTip& tip, const Vec2& x) {
    const Vec2 d = x - tip.point;
    const double x1 = d.dot(tip.tangent);
    const double x2 = d.dot(tip.normal());
    double theta = std::atan2(x2, x1);
    if (theta == -std::numbers::pi) theta = std::numbers::pi;
    return {d.norm(), theta};
}

inline PolarCoords tip_polar(const CrackGeometry& crack, int tip_index, const Vec2& x) {
    const auto tips = crack.tips();
    if (tip_index < 0 || tip_index >= static_cast<int>(tips.size())) throw ArgumentError("invalid tip index");
    return tip_polar(tips[tip_index], x);
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum class ElementTag { Standard, Split, Tip };

/// How the crack crosses one element. Points lie on the element boundary
/// except `tip_point`.
struct ElementCut {
    Vec2 entry;            // boundary point where the crack enters (travel order)
    Vec2 exit;             // Split: boundary exit point; Tip: the tip itself
    int entry_edge = -1;   // local edge index, edge k joins corners k and k+1
    int exit_edge = -1;    // Split only
    int tip = -1;          // Tip only
};

struct ElementClassification {
    std::vector<ElementTag> tags;
    std::vector<std::optional<ElementCut>> cuts;
    std::vector<int> node_set_j;  // Heaviside-enriched nodes, ascending
    std::vector<int> node_set_k;  // tip-enriched nodes, ascending
    std::vector<int> node_tip;    // per node: tip index for K nodes, -1 otherwise
    /// Crack actually used (after degeneracy perturbation).
    CrackGeometry crack;
    bool perturbed = false;
    double element_size = 0;

    int count(ElementTag t) const { return static_cast<int>(std::count(tags.begin(), tags.end(), t)); }
    bool in_j(int node) const { return std::binary_search(node_set_j.begin(), node_set_j.end(), node); }
    bool in_k(int node) const { return node_tip[node] >= 0; }
};

namespace detail {

struct ClipResult {
    double t_enter, t_leave;
    int enter_edge, leave_edge;  // -1 when the segment endpoint is inside
};

/// Cyrus-Beck clip of segment a->b against a convex CCW polygon.
inline std::optional<ClipResult> clip_segment(const Vec2& a, const Vec2& b, const std::array<Vec2, 4>& poly) {
    ClipResult r{0.0, 1.0, -1, -1};
    const Vec2 d = b - a;
    for (int k = 0; k < 4; ++k) {
        const Vec2 p0 = poly[k];
        const Vec2 n = perp(poly[(k + 1) % 4] - p0);  // inward for CCW polygons
        const double num = n.dot(a - p0);
        const double den = n.dot(d);
        if (den == 0) {
            if (num < 0) return std::nullopt;
            continue;
        }
        const double t = -num / den;
        // an end lying on an edge still records that edge
        constexpr double on_edge = 1e-12;
        if (den > 0) {
            if (t > r.t_enter || (r.enter_edge < 0 && t >= r.t_enter - on_edge)) {
                r.t_enter = std::max(t, 0.0);
                r.enter_edge = k;
            }
        } else if (t < r.t_leave || (r.leave_edge < 0 && t <= r.t_leave + on_edge)) {
            r.t_leave = std::min(t, 1.0);
            r.leave_edge = k;
        }
    }
    if (r.t_enter >= r.t_leave) return std::nullopt;
    return r;
}

inline bool strictly_inside(const Vec2& p, const std::array<Vec2, 4>& poly) {
    for (int k = 0; k < 4; ++k)
        if (cross2(poly[(k + 1) % 4] - poly[k], p - poly[k]) <= 0) return false;
    return true;
}

inline double distance_to_grid_line(const StructuredMesh2& mesh, const Vec2& p, int axis) {
    const double h = mesh.spacing(axis);
    const double s = (p[axis] - mesh.extents.lo[axis]) / h;
    const double nearest = std::clamp(std::round(s), 0.0, static_cast<double>(mesh.divisions[axis]));
    return std::abs(s - nearest) * h;
}

}  // namespace detail

/// Applies the degeneracy rule: a crack passing within 1e-9 h of a node is
/// shifted by 1e-6 h along its normal, and a tip within 1e-9 h of an element
/// edge is pulled back by 1e-6 h along its tangent. Returns true if anything moved.
inline bool regularize_crack(const StructuredMesh2& mesh, CrackGeometry& crack) {
    const double h = mesh.element_size();
    const double tol = 1e-9 * h;
    const double delta = 1e-6 * h;
    bool moved = false;
    for (int iteration = 0; iteration < 8; ++iteration) {
        auto& v = crack.mutable_vertices();
        const int nseg = crack.segment_count();

        bool near_node = false;
        for (int s = 0; s < nseg && !near_node; ++s) {
            const Vec2 lo = v[s].cwiseMin(v[s + 1]).array() - tol;
            const Vec2 hi = v[s].cwiseMax(v[s + 1]).array() + tol;
            for (const auto& p : mesh.nodes) {
                if ((p.array() < lo.array()).any() || (p.array() > hi.array()).any()) continue;
                if (detail::point_segment_distance(p, v[s], v[s + 1]) <= tol) {
                    near_node = true;
                    break;
                }
            }
        }
        if (near_node) {
            std::vector<Vec2> shifted(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                Vec2 n = Vec2::Zero();
                if (i > 0) n += perp((v[i] - v[i - 1]).normalized());
                if (i + 1 < v.size()) n += perp((v[i + 1] - v[i]).normalized());
                shifted[i] = v[i] + delta * n.normalized();
            }
            v = shifted;
            moved = true;
            continue;
        }

        bool tip_moved = false;
        for (const auto& tip : crack.tips()) {
            if (!mesh.extents.contains(tip.point, tol)) continue;
            for (int axis = 0; axis < 2; ++axis) {
                if (detail::distance_to_grid_line(mesh, tip.point, axis) > tol) continue;
                const std::size_t vi = tip.orientation > 0 ? v.size() - 1 : 0;
                if (std::abs(tip.tangent[axis]) > 1e-3) {
                    v[vi] -= delta * tip.tangent;
                } else {
                    v[vi] += delta * tip.normal();
                }
                tip_moved = true;
                break;
            }
        }
        if (tip_moved) {
            moved = true;
            continue;
        }
        return moved;
    }
    throw GeometryError("crack degeneracy could not be resolved by perturbation");
}

/// Tags each element Standard, Split or Tip and selects the enriched node
/// sets (topological enrichment: K = nodes of tip elements, J = remaining
/// nodes of split elements).
inline ElementClassification classify(const StructuredMesh2& mesh, const CrackGeometry& input_crack) {
    if (input_crack.empty()) throw ArgumentError("classification needs a crack");
    ElementClassification cls;
    cls.crack = input_crack;
    cls.perturbed = regularize_crack(mesh, cls.crack);
    cls.element_size = mesh.element_size();
    const int ne = mesh.element_count();
    cls.tags.assign(ne, ElementTag::Standard);
    cls.cuts.assign(ne, std::nullopt);
    cls.node_tip.assign(mesh.node_count(), -1);

    const auto& v = cls.crack.vertices();
    const auto tips = cls.crack.tips();
    const double tol = 1e-9 * cls.element_size;

    // Non-tip ends must not sit strictly inside the domain.
    auto check_free_end = [&](const Vec2& p) {
        Box<2> inner{mesh.extents.lo.array() + tol, mesh.extents.hi.array() - tol};
        if (inner.contains(p)) throw GeometryError("crack end inside the domain must be a tip");
    };
    if (!cls.crack.start_is_tip()) check_free_end(v.front());
    if (!cls.crack.end_is_tip()) check_free_end(v.back());

    std::vector<int> tip_element(tips.size(), -1);
    for (std::size_t t = 0; t < tips.size(); ++t) {
        if (!mesh.extents.contains(tips[t].point)) continue;
        const auto e = mesh.locate(tips[t].point);
        if (e && detail::strictly_inside(tips[t].point, mesh.element_coords(*e))) tip_element[t] = *e;
    }
    if (tips.size() == 2 && tip_element[0] >= 0 && tip_element[0] == tip_element[1])
        throw GeometryError("both crack tips lie in one element");

    for (int e = 0; e < ne; ++e) {
        const auto poly = mesh.element_coords(e);
        const Vec2 elo = poly[0].cwiseMin(poly[2]);
        const Vec2 ehi = poly[0].cwiseMax(poly[2]);

        struct Piece {
            Vec2 a, b;
            int ea, eb;
        };
        std::vector<Piece> pieces;
        for (int s = 0; s < cls.crack.segment_count(); ++s) {
            const Vec2 lo = v[s].cwiseMin(v[s + 1]);
            const Vec2 hi = v[s].cwiseMax(v[s + 1]);
            if ((hi.array() < elo.array()).any() || (lo.array() > ehi.array()).any()) continue;
            const auto c = detail::clip_segment(v[s], v[s + 1], poly);
            if (!c) continue;
            const Vec2 d = v[s + 1] - v[s];
            if ((c->t_leave - c->t_enter) * d.norm() <= tol) continue;
            pieces.push_back({v[s] + c->t_enter * d, v[s] + c->t_leave * d, c->enter_edge, c->leave_edge});
        }
        if (pieces.empty()) continue;

        int tip_here = -1;
        for (std::size_t t = 0; t < tips.size(); ++t)
            if (tip_element[t] == e) tip_here = static_cast<int>(t);

        if (pieces.size() > 1) throw GeometryError("crack kink inside an element is not supported");
        const Piece& p = pieces.front();
        if (tip_here >= 0) {
            ElementCut cut;
            cut.tip = tip_here;
            if (tips[tip_here].orientation > 0) {
                if (p.ea < 0) throw GeometryError("tip element without a boundary entry point");
                cut.entry = p.a;
                cut.entry_edge = p.ea;
            } else {
                if (p.eb < 0) throw GeometryError("tip element without a boundary entry point");
                cut.entry = p.b;
                cut.entry_edge = p.eb;
            }
            cut.exit = tips[tip_here].point;
            cls.tags[e] = ElementTag::Tip;
            cls.cuts[e] = cut;
        } else {
            if (p.ea < 0 || p.eb < 0)
                throw GeometryError("crack ends inside an element that is not a tip element");
            if (p.ea == p.eb) continue;
            cls.tags[e] = ElementTag::Split;
            cls.cuts[e] = ElementCut{p.a, p.b, p.ea, p.eb, -1};
        }
    }

    for (int e = 0; e < ne; ++e) {
        if (cls.tags[e] != ElementTag::Tip) continue;
        const int t = cls.cuts[e]->tip;
        for (int n : mesh.elements[e]) {
            if (cls.node_tip[n] >= 0 && cls.node_tip[n] != t)
                throw GeometryError("node enriched by two crack tips");
            cls.node_tip[n] = t;
        }
    }
    for (int n = 0; n < mesh.node_count(); ++n)
        if (cls.node_tip[n] >= 0) cls.node_set_k.push_back(n);
    std::vector<char> in_j(mesh.node_count(), 0);
    for (int e = 0; e < ne; ++e)
        if (cls.tags[e] == ElementTag::Split)
            for (int n : mesh.elements[e])
                if (cls.node_tip[n] < 0) in_j[n] = 1;
    for (int n = 0; n < mesh.node_count(); ++n)
        if (in_j[n]) cls.node_set_j.push_back(n);
    return cls;
}

}  // namespace lsxfem
