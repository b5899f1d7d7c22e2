#pragma once

/// @file fracture.hpp
/// @brief Williams/Westergaard reference fields, empirical and analytic
/// stress intensity factors, domain interaction integral and error norms.

#include "assembly.hpp"
#include "core.hpp"
#include "enrichment.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace lsxfem {

struct SifPair {
    double KI = 0;
    double KII = 0;
    double r_inner = 0;
    double r_outer = 0;
    /// Largest relative change of either SIF when the outer radius is
    /// reduced to the midpoint of the annulus.
    double plateau_deviation = 0;
};

// ---------------------------------------------------------------------------
// Reference fields (tip frame)
// ---------------------------------------------------------------------------

/// Near-tip displacement of mixed-mode loading in the tip frame.
inline Vec2 williams_displacement(double KI, double KII, double r, double theta, double mu, double kappa) {
    const double a = std::sqrt(r / (2 * std::numbers::pi)) / (2 * mu);
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta), ct = std::cos(theta);
    return a * Vec2(KI * c * (kappa - ct) + KII * s * (kappa + 2 + ct),
                    KI * s * (kappa - ct) - KII * c * (kappa - 2 + ct));
}

/// Displacement gradient G(i, j) = du_i/dx_j of the Williams field, tip frame.
inline Eigen::Matrix2d williams_gradient(double KI, double KII, double r, double theta, double mu, double kappa) {
    if (!(r > 0)) throw SingularPointError("Williams field gradient is singular at the tip");
    const double sr = std::sqrt(r);
    const double a = 1 / (2 * mu * std::sqrt(2 * std::numbers::pi));
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const double ct = std::cos(theta), st = std::sin(theta);
    // u = a sqrt(r) g(theta)
    const Vec2 g(KI * c * (kappa - ct) + KII * s * (kappa + 2 + ct), KI * s * (kappa - ct) - KII * c * (kappa - 2 + ct));
    const Vec2 dg(KI * (-0.5 * s * (kappa - ct) + c * st) + KII * (0.5 * c * (kappa + 2 + ct) - s * st),
                  KI * (0.5 * c * (kappa - ct) + s * st) + KII * (0.5 * s * (kappa - 2 + ct) + c * st));
    const Vec2 du_dr = a * g / (2 * sr);
    const Vec2 du_dt_over_r = a * dg / sr;
    Eigen::Matrix2d G;
    G.col(0) = ct * du_dr - st * du_dt_over_r;
    G.col(1) = st * du_dr + ct * du_dt_over_r;
    return G;
}

/// Mode I near-tip displacement (plane strain), tip frame.
inline Vec2 westergaard_displacement(double r, double theta, double KI, double E, double nu) {
    const double f = 2 * (1 + nu) / std::sqrt(2 * std::numbers::pi) * KI / E * std::sqrt(r);
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const double m = 2 - 2 * nu - c * c;
    return f * m * Vec2(c, s);
}

/// Symmetric strain tensor of the mode I near-tip field, tip frame.
inline Eigen::Matrix2d westergaard_strain(double r, double theta, double KI, double E, double nu) {
    const Eigen::Matrix2d g = williams_gradient(KI, 0, r, theta, E / (2 * (1 + nu)), 3 - 4 * nu);
    return 0.5 * (g + g.transpose());
}

/// Geometry factor of a single edge crack in tension (a/W = alpha).
inline double edge_geometry_factor(double alpha) {
    return 1.12 - 0.231 * alpha + 10.55 * alpha * alpha - 21.72 * std::pow(alpha, 3) + 30.39 * std::pow(alpha, 4);
}

inline double edge_reference_KI(double sigma, double a, double W) {
    const double alpha = a / W;
    if (!(alpha > 0 && alpha < 1)) throw ArgumentError("edge crack ratio a/W must lie in (0, 1)");
    return edge_geometry_factor(alpha) * sigma * std::sqrt(std::numbers::pi * a);
}

/// Centre crack of half-length a inclined at beta (radians) under remote tension.
inline SifPair inclined_reference(double sigma, double a, double beta) {
    const double k = sigma * std::sqrt(std::numbers::pi * a);
    SifPair p;
    p.KI = k * std::cos(beta) * std::cos(beta);
    p.KII = k * std::sin(beta) * std::cos(beta);
    return p;
}

/// |K - Kref| / |Kref|, or |K - Kref| / K0 when |Kref| < 0.1 K0.
inline double sif_error(double K, double Kref, double K0) {
    if (std::abs(Kref) < 0.1 * K0) return std::abs(K - Kref) / K0;
    return std::abs(K - Kref) / std::abs(Kref);
}

// ---------------------------------------------------------------------------
// Interaction integral
// ---------------------------------------------------------------------------

/// Displacement gradient (global frame) at one weighted point.
struct FieldSample {
    Vec2 x;
    double weight;
    Eigen::Matrix2d grad;  // du_i/dx_j
};

struct ExtractionDomain {
    double r_inner;
    double r_outer;

    /// Weight 1 inside r_inner, 0 outside r_outer, C1 cubic in between.
    double q(double r) const {
        if (r <= r_inner) return 1;
        if (r >= r_outer) return 0;
        const double s = (r - r_inner) / (r_outer - r_inner);
        return 1 - 3 * s * s + 2 * s * s * s;
    }
    double dq_dr(double r) const {
        if (r <= r_inner || r >= r_outer) return 0;
        const double l = r_outer - r_inner;
        const double s = (r - r_inner) / l;
        return (-6 * s + 6 * s * s) / l;
    }
};

/// Inner radius 1.5 h, outer radius min(3 h + tip-element diagonal, a / 2).
inline ExtractionDomain default_extraction_domain(double h, double tip_element_diagonal, double crack_length) {
    return {1.5 * h, std::min(3 * h + tip_element_diagonal, 0.5 * crack_length)};
}

namespace detail {

inline Eigen::Vector3d to_voigt(const Eigen::Matrix2d& eps) { return {eps(0, 0), eps(1, 1), 2 * eps(0, 1)}; }

inline Eigen::Matrix2d stress_tensor(const Eigen::Matrix2d& grad, const Eigen::Matrix3d& c) {
    const Eigen::Vector3d s = c * to_voigt(0.5 * (grad + grad.transpose()));
    Eigen::Matrix2d t;
    t << s[0], s[2], s[2], s[1];
    return t;
}

inline std::array<double, 2> interaction_values(const std::vector<FieldSample>& samples, const CrackTip& tip,
                                                const Material& mat, const ExtractionDomain& dom) {
    const Eigen::Matrix3d c = mat.C<2>();
    const double mu = mat.shear_modulus(), kappa = mat.kappa();
    Eigen::Matrix2d R;  // rows: local axes
    R.row(0) = tip.tangent.transpose();
    R.row(1) = tip.normal().transpose();
    std::array<double, 2> out{0, 0};
    for (const auto& p : samples) {
        const Vec2 d = R * (p.x - tip.point);
        const double r = d.norm();
        const double dq = dom.dq_dr(r);
        if (dq == 0) continue;
        const Vec2 gq = dq * d / r;
        const double theta = std::atan2(d.y(), d.x());
        const Eigen::Matrix2d G = R * p.grad * R.transpose();
        const Eigen::Matrix2d sig = stress_tensor(G, c);
        for (int mode = 0; mode < 2; ++mode) {
            const Eigen::Matrix2d Ga = williams_gradient(mode == 0, mode == 1, r, theta, mu, kappa);
            const Eigen::Matrix2d siga = stress_tensor(Ga, c);
            const Eigen::Matrix2d epsa = 0.5 * (Ga + Ga.transpose());
            const double w = (sig.array() * epsa.array()).sum();
            double integrand = 0;
            for (int j = 0; j < 2; ++j) {
                double t = 0;
                for (int i = 0; i < 2; ++i) t += sig(i, j) * Ga(i, 0) + siga(i, j) * G(i, 0);
                if (j == 0) t -= w;
                integrand += t * gq[j];
            }
            out[mode] += p.weight * integrand;
        }
    }
    return out;
}

}  // namespace detail

/// Domain-form interaction integral with Williams auxiliary fields. The
/// samples must cover the annulus of `dom`; the result is plateau-checked
/// against the annulus with half the radial width.
inline SifPair interaction_integral(const std::vector<FieldSample>& samples, const CrackTip& tip, const Material& mat,
                                   const ExtractionDomain& dom) {
    if (!(dom.r_outer > dom.r_inner && dom.r_inner >= 0)) throw DomainError("empty extraction annulus");
    const double es = mat.effective_modulus();
    const auto full = detail::interaction_values(samples, tip, mat, dom);
    const ExtractionDomain half{dom.r_inner, 0.5 * (dom.r_inner + dom.r_outer)};
    const auto inner = detail::interaction_values(samples, tip, mat, half);
    SifPair p;
    p.KI = 0.5 * es * full[0];
    p.KII = 0.5 * es * full[1];
    p.r_inner = dom.r_inner;
    p.r_outer = dom.r_outer;
    const double scale = std::max({std::abs(full[0]), std::abs(full[1]), 1e-300});
    p.plateau_deviation = std::max(std::abs(full[0] - inner[0]), std::abs(full[1] - inner[1])) / scale;
    return p;
}

/// Polar Gauss samples of an analytic gradient field over an annulus. Each
/// radial half gets its own rule so the half-width plateau check is
/// integrated as accurately as the full annulus.
inline std::vector<FieldSample> annulus_samples(const CrackTip& tip, const ExtractionDomain& dom,
                                                const std::function<Eigen::Matrix2d(const Vec2&)>& grad,
                                                int nr = 24, int ntheta = 96) {
    const auto gr = gauss_legendre(std::max(1, nr / 2));
    const auto gt = gauss_legendre(ntheta);
    std::vector<FieldSample> out;
    const double mid = 0.5 * (dom.r_inner + dom.r_outer);
    for (const auto [a, b] : {std::pair{dom.r_inner, mid}, std::pair{mid, dom.r_outer}}) {
        const double dr = 0.5 * (b - a);
        for (std::size_t i = 0; i < gr.size(); ++i) {
            const double r = a + dr * (1 + gr.points[i][0]);
            for (int k = 0; k < ntheta; ++k) {
                const double th = std::numbers::pi * gt.points[k][0];
                const Vec2 x = tip.point + r * (std::cos(th) * tip.tangent + std::sin(th) * tip.normal());
                out.push_back({x, gr.weights[i] * dr * gt.weights[k] * std::numbers::pi * r, grad(x)});
            }
        }
    }
    return out;
}

/// Samples of the compatible discrete displacement gradient over the
/// elements meeting the annulus: 13 points per conforming triangle on cut
/// elements, 5x5 Gauss on the others.
inline std::vector<FieldSample> mesh_samples(const Discretization& disc, const Eigen::VectorXd& u, int tip_index,
                                             const ExtractionDomain& dom) {
    const auto& mesh = disc.mesh();
    const auto& tip = disc.field().tips().at(tip_index);
    std::vector<FieldSample> out;
    const auto g5 = gauss_tensor<2>(5);
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto c = mesh.element_coords(e);
        double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
        const Vec2 lo = c[0].cwiseMin(c[2]), hi = c[0].cwiseMax(c[2]);
        const Vec2 nearest = tip.point.cwiseMax(lo).cwiseMin(hi);
        dmin = (nearest - tip.point).norm();
        for (const auto& v : c) dmax = std::max(dmax, (v - tip.point).norm());
        if (dmin >= dom.r_outer || dmax <= dom.r_inner) continue;
        const ElementFunctions fn(disc, e);
        auto add = [&](const Vec2& x, double w, int side) {
            const double r = (x - tip.point).norm();
            if (r <= dom.r_inner || r >= dom.r_outer) return;
            Vec2 disp;
            Eigen::Matrix2d grad;
            fn.displacement_and_gradient(u, x, side, disp, grad);
            out.push_back({x, w, grad});
        };
        if (disc.classification().tags[e] == ElementTag::Standard) {
            const Quad4 iso(c);
            for (std::size_t q = 0; q < g5.size(); ++q)
                add(iso.map(g5.points[q]), g5.weights[q] * iso.jacobian(g5.points[q]).determinant(), 0);
        } else {
            for (const auto& cell : disc.subcells(e, Method::Xfem))
                for (const auto& p : interior_points(cell, InteriorRule::TipXfem)) add(p.x, p.weight, cell.side);
        }
    }
    return out;
}

/// Extracts the SIFs of one tip from a discrete solution.
inline SifPair extract_sifs(const Discretization& disc, const Eigen::VectorXd& u, int tip_index, const Material& mat,
                            const ExtractionDomain& dom) {
    const auto& tip = disc.field().tips().at(tip_index);
    const auto& box = disc.mesh().extents;
    const double clearance = std::min({tip.point.x() - box.lo.x(), box.hi.x() - tip.point.x(),
                                       tip.point.y() - box.lo.y(), box.hi.y() - tip.point.y()});
    if (dom.r_outer > clearance) throw DomainError("extraction domain crosses the outer boundary");
    return interaction_integral(mesh_samples(disc, u, tip_index, dom), tip, mat, dom);
}

// ---------------------------------------------------------------------------
// Error norms
// ---------------------------------------------------------------------------

struct ErrorNorms {
    double relL2 = 0;
    double relH1 = 0;
};

/// Exact field in global coordinates; `side` resolves points on the crack.
struct ExactField {
    std::function<Vec2(const Vec2&, int side)> displacement;
    std::function<Eigen::Matrix2d(const Vec2&, int side)> gradient;  // du_i/dx_j
};

/// Relative L2 error of the displacement and relative energy error, both
/// integrated with the backend's own strain-operator points.
inline ErrorNorms error_norms(const Discretization& disc, const Eigen::VectorXd& u, Method method, const Material& mat,
                              const ExactField& exact) {
    const Eigen::Matrix3d c = mat.C<2>();
    double el2 = 0, nl2 = 0, eh1 = 0, nh1 = 0;
    const auto& mesh = disc.mesh();
    std::optional<ElementIntegration<2>> standard_ops;
    Vec2 origin0 = mesh.element_coords(0)[0];
    for (int e = 0; e < mesh.element_count(); ++e) {
        const ElementFunctions fn(disc, e);
        const Eigen::VectorXd ue = fn.gather(u);
        const bool plain = disc.unenriched(e) && disc.classification().tags[e] == ElementTag::Standard;
        ElementIntegration<2> ops;
        Vec2 shift = Vec2::Zero();
        if (plain) {
            if (!standard_ops) standard_ops = standard_strain_operators<2>(mesh.element_coords(0), method, fn.dofs());
            shift = mesh.element_coords(e)[0] - origin0;
        }
        const auto& in = plain ? *standard_ops : (ops = element_strain_operators(disc, e, method));
        for (const auto& op : in.ops) {
            const Vec2 x = op.x + shift;
            const Vec2 uh = fn.displacement(u, x, op.side);
            const Vec2 ue_x = exact.displacement(x, op.side);
            const Eigen::Matrix2d g = exact.gradient(x, op.side);
            const Eigen::Vector3d eps = detail::to_voigt(0.5 * (g + g.transpose()));
            const Eigen::Vector3d epsh = op.B * ue;
            const Eigen::Vector3d de = eps - epsh;
            el2 += op.weight * (ue_x - uh).squaredNorm();
            nl2 += op.weight * ue_x.squaredNorm();
            eh1 += op.weight * de.dot(c * de);
            nh1 += op.weight * eps.dot(c * eps);
        }
    }
    return {std::sqrt(el2 / nl2), std::sqrt(eh1 / nh1)};
}

}  // namespace lsxfem
