#pragma once

/// @file enrichment.hpp
/// @brief Heaviside and near-tip enrichment functions, their shifted forms
/// and analytic gradients.

#include "core.hpp"
#include "mesh.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace lsxfem {

inline double heaviside(double phi) { return phi < 0 ? -1.0 : 1.0; }

/// Branch functions spanning the near-tip asymptotic displacement field.
inline std::array<double, 4> tip_functions(double r, double theta) {
    const double sr = std::sqrt(r);
    const double s2 = std::sin(0.5 * theta), c2 = std::cos(0.5 * theta);
    const double s = std::sin(theta);
    return {sr * s2, sr * c2, sr * s * s2, sr * s * c2};
}

inline std::atomic<std::uint64_t>& tip_gradient_call_counter() {
    static std::atomic<std::uint64_t> calls{0};
    return calls;
}

/// Number of tip_function_gradients evaluations so far (process-wide).
inline std::uint64_t tip_gradient_calls() { return tip_gradient_call_counter().load(); }

/// Global-frame gradients of the four branch functions.
inline std::array<Vec2, 4> tip_function_gradients(double r, double theta, const CrackTip& frame) {
    if (!(r > 0)) throw SingularPointError("tip function gradients are singular at the crack tip");
    tip_gradient_call_counter().fetch_add(1, std::memory_order_relaxed);

    const double sr = std::sqrt(r);
    const double s2 = std::sin(0.5 * theta), c2 = std::cos(0.5 * theta);
    const double s = std::sin(theta), c = std::cos(theta);

    // d/dr and (1/r) d/dtheta of each function
    const std::array<double, 4> dr{0.5 * s2 / sr, 0.5 * c2 / sr, 0.5 * s * s2 / sr, 0.5 * s * c2 / sr};
    const std::array<double, 4> dt{0.5 * c2 / sr, -0.5 * s2 / sr, (c * s2 + 0.5 * s * c2) / sr,
                                   (c * c2 - 0.5 * s * s2) / sr};

    const Vec2 e1 = frame.tangent;
    const Vec2 e2 = frame.normal();
    std::array<Vec2, 4> g;
    for (int m = 0; m < 4; ++m) {
        const double g1 = c * dr[m] - s * dt[m];
        const double g2 = s * dr[m] + c * dt[m];
        g[m] = g1 * e1 + g2 * e2;
    }
    return g;
}

struct TipBasisValue {
    std::array<double, 4> F{};
    std::array<Vec2, 4> gradF{};
};

/// Evaluates enrichment functions for one classified mesh.
///
/// Points that lie on the crack itself are ambiguous; `side` (+1/-1, the sign
/// of the signed distance of the region the point belongs to) resolves them.
/// Nodal values used for shifting are cached at construction.
class EnrichmentField {
public:
    EnrichmentField(const StructuredMesh2& mesh, const ElementClassification& cls)
        : mesh_(&mesh), cls_(&cls), tips_(cls.crack.tips()), tol_(1e-10 * cls.element_size) {
        node_h_.assign(mesh.node_count(), 0.0);
        node_f_.assign(mesh.node_count(), {0, 0, 0, 0});
        for (int n : cls.node_set_j) node_h_[n] = heaviside(signed_distance(cls.crack, mesh.nodes[n]));
        for (int n : cls.node_set_k) {
            const Vec2& x = mesh.nodes[n];
            const int side = signed_distance(cls.crack, x) < 0 ? -1 : 1;
            const auto p = polar(cls.node_tip[n], x, side);
            node_f_[n] = tip_functions(p.r, p.theta);
        }
    }

    const std::vector<CrackTip>& tips() const { return tips_; }
    const ElementClassification& classification() const { return *cls_; }
    double on_crack_tolerance() const { return tol_; }

    /// Side of the crack x lies on, falling back to `side` on the crack line.
    int side_of(const Vec2& x, int side) const {
        const double phi = signed_distance(cls_->crack, x);
        if (std::abs(phi) <= tol_) return side < 0 ? -1 : 1;
        return phi < 0 ? -1 : 1;
    }

    /// Tip polar coordinates with theta = +-pi chosen from `side` on the crack faces.
    PolarCoords polar(int tip, const Vec2& x, int side) const {
        const CrackTip& t = tips_[tip];
        const Vec2 d = x - t.point;
        const double x1 = d.dot(t.tangent);
        const double x2 = d.dot(t.normal());
        double theta;
        if (std::abs(x2) <= tol_ && x1 < 0)
            theta = side * t.orientation < 0 ? -std::numbers::pi : std::numbers::pi;
        else
            theta = std::atan2(x2, x1);
        return {d.norm(), theta};
    }

    double heaviside_at(const Vec2& x, int side) const { return side_of(x, side) < 0 ? -1.0 : 1.0; }

    double node_heaviside(int node) const { return node_h_[node]; }
    const std::array<double, 4>& node_tip_values(int node) const { return node_f_[node]; }

    /// H(x) - H(x_J)
    double shifted_heaviside(const Vec2& x, int node_j, int side = 1) const {
        return heaviside_at(x, side) - node_h_[node_j];
    }

    /// F_m(x) - F_m(x_K), m in 0..3
    double shifted_tip(const Vec2& x, int node_k, int m, int side = 1) const {
        const auto p = polar(cls_->node_tip[node_k], x, side);
        return tip_functions(p.r, p.theta)[m] - node_f_[node_k][m];
    }

    TipBasisValue tip_basis(int tip, const Vec2& x, int side, bool with_gradients) const {
        const auto p = polar(tip, x, side);
        TipBasisValue v;
        v.F = tip_functions(p.r, p.theta);
        if (with_gradients) v.gradF = tip_function_gradients(p.r, p.theta, tips_[tip]);
        return v;
    }

private:
    const StructuredMesh2* mesh_;
    const ElementClassification* cls_;
    std::vector<CrackTip> tips_;
    double tol_;
    std::vector<double> node_h_;
    std::vector<std::array<double, 4>> node_f_;
};

}  // namespace lsxfem
