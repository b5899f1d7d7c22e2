#pragma once

/// @file smoothing.hpp
/// @brief Constant and linear strain smoothing over subcells.
///
/// Constant smoothing takes one gradient per subcell from the boundary
/// integral (1/A) \oint N n dG. Linear smoothing enforces divergence
/// consistency against every monomial q of a linear (or multilinear) basis:
///
///     sum_m w_m q(x_m) d_i(x_m) = \oint N q n_i dG - \int N q_{,i} dO
///
/// and solves the square moment system W d_i = f_i for the gradient values
/// d_i at the interior points. Both use function values only.

#include "core.hpp"
#include "quadrature.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace lsxfem {

/// Ordered monomial basis, each monomial given by its exponents.
template <int Dim>
struct SmoothingBasis {
    std::vector<std::array<int, Dim>> monomials;

    int size() const { return static_cast<int>(monomials.size()); }

    static SmoothingBasis constant() { return {{std::array<int, Dim>{}}}; }

    /// {1, x, y} on triangles, {1, x, y, xy} on quads, {1, x, y, z} on tets,
    /// {1, x, y, z, xy, yz, zx, xyz} on hexes.
    static SmoothingBasis for_cell(CellKind kind) {
        SmoothingBasis b;
        b.monomials.push_back({});
        for (int a = 0; a < Dim; ++a) {
            std::array<int, Dim> e{};
            e[a] = 1;
            b.monomials.push_back(e);
        }
        if (kind == CellKind::Quad) b.monomials.push_back({1, 1});
        if constexpr (Dim == 3) {
            if (kind == CellKind::Hex) {
                b.monomials.push_back({1, 1, 0});
                b.monomials.push_back({0, 1, 1});
                b.monomials.push_back({1, 0, 1});
                b.monomials.push_back({1, 1, 1});
            }
        }
        return b;
    }

    static double value(const std::array<int, Dim>& e, const Vec<Dim>& xi) {
        double v = 1;
        for (int a = 0; a < Dim; ++a)
            if (e[a]) v *= xi[a];
        return v;
    }

    /// d/dxi_i of a monomial with exponents in {0, 1}.
    static double derivative(const std::array<int, Dim>& e, const Vec<Dim>& xi, int i) {
        if (!e[i]) return 0;
        double v = 1;
        for (int a = 0; a < Dim; ++a)
            if (a != i && e[a]) v *= xi[a];
        return v;
    }
};

/// Gradients of a set of nf functions at the interior points of one subcell.
template <int Dim>
struct SmoothedGradientField {
    std::vector<Vec<Dim>> points;
    std::vector<double> weights;
    std::vector<Eigen::Matrix<double, Dim, Eigen::Dynamic>> gradients;  // per point, Dim x nf
    double condition = 1;  // of the moment matrix (1 for constant smoothing)
};

/// Moment matrix and right-hand sides of the linear smoothing solve, in the
/// centred and scaled coordinates xi = (x - c) / L.
template <int Dim>
struct MomentSystem {
    Eigen::MatrixXd W;                     // monomial k x point m: w_m q_k(x_m)
    std::array<Eigen::MatrixXd, Dim> f;    // monomial k x function: boundary - domain correction
    Vec<Dim> center;
    double length;
};

/// Function set evaluator: (x, side) -> vector of nf values.
template <int Dim, class Functions>
SmoothedGradientField<Dim> constant_smoothed_gradients(const Subcell<Dim>& cell, Functions&& functions) {
    const double measure = cell.measure();
    if (!(measure > 0)) throw GeometryError("degenerate subcell (non-positive measure)");
    Eigen::Matrix<double, Dim, Eigen::Dynamic> g;
    bool first = true;
    for (const auto& p : boundary_points(cell)) {
        const Eigen::VectorXd v = functions(p.x, cell.side);
        if (first) {
            g.setZero(Dim, v.size());
            first = false;
        }
        g.noalias() += (p.weight * p.normal) * v.transpose();
    }
    SmoothedGradientField<Dim> out;
    out.points.push_back(cell.centroid());
    out.weights.push_back(measure);
    out.gradients.push_back(g / measure);
    return out;
}

template <int Dim, class Functions>
MomentSystem<Dim> build_moment_system(const Subcell<Dim>& cell, const SmoothingBasis<Dim>& basis,
                                      const std::vector<IntegrationPoint<Dim>>& interior, Functions&& functions) {
    MomentSystem<Dim> sys;
    sys.center = cell.centroid();
    sys.length = cell.diameter();
    const int nq = basis.size();
    const int np = static_cast<int>(interior.size());
    sys.W.resize(nq, np);
    Eigen::Index nf = -1;
    auto xi_of = [&](const Vec<Dim>& x) -> Vec<Dim> { return (x - sys.center) / sys.length; };

    for (int m = 0; m < np; ++m) {
        const Vec<Dim> xi = xi_of(interior[m].x);
        for (int k = 0; k < nq; ++k) sys.W(k, m) = interior[m].weight * basis.value(basis.monomials[k], xi);
    }
    for (const auto& p : boundary_points(cell)) {
        const Eigen::VectorXd v = functions(p.x, cell.side);
        if (nf < 0) {
            nf = v.size();
            for (auto& fi : sys.f) fi.setZero(nq, nf);
        }
        const Vec<Dim> xi = xi_of(p.x);
        for (int k = 0; k < nq; ++k) {
            const double q = basis.value(basis.monomials[k], xi);
            for (int i = 0; i < Dim; ++i) sys.f[i].row(k).noalias() += (p.weight * q * p.normal[i]) * v.transpose();
        }
    }
    // domain correction: \int N q_{,i}, with q_{,i} = (1/L) dq/dxi_i
    for (int m = 0; m < np; ++m) {
        const Vec<Dim> xi = xi_of(interior[m].x);
        const Eigen::VectorXd v = functions(interior[m].x, cell.side);
        for (int k = 0; k < nq; ++k)
            for (int i = 0; i < Dim; ++i) {
                const double dq = basis.derivative(basis.monomials[k], xi, i) / sys.length;
                if (dq != 0) sys.f[i].row(k).noalias() -= (interior[m].weight * dq) * v.transpose();
            }
    }
    return sys;
}

/// Linear smoothing: gradients at the interior points of the rule paired
/// with `basis` (one point per monomial).
template <int Dim, class Functions>
SmoothedGradientField<Dim> linear_smoothed_gradients(const Subcell<Dim>& cell, Functions&& functions,
                                                     const SmoothingBasis<Dim>& basis) {
    const double measure = cell.measure();
    if (!(measure > 0)) throw GeometryError("degenerate subcell (non-positive measure)");
    const auto interior = interior_points(cell, basis.size() == 1 ? InteriorRule::Centroid : InteriorRule::Low);
    if (static_cast<int>(interior.size()) != basis.size())
        throw ArgumentError("smoothing basis size does not match the interior rule");
    const auto sys = build_moment_system(cell, basis, interior, functions);

    SmoothedGradientField<Dim> out;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.W);
    const auto& s = svd.singularValues();
    const double smax = s(0), smin = s(s.size() - 1);
    if (!(smin > 1e-14 * smax)) throw GeometryError("singular moment matrix (degenerate subcell)");
    out.condition = smax / smin;

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.W);
    const int np = static_cast<int>(interior.size());
    const Eigen::Index nf = sys.f[0].cols();
    out.gradients.assign(np, Eigen::Matrix<double, Dim, Eigen::Dynamic>::Zero(Dim, nf));
    for (int i = 0; i < Dim; ++i) {
        const Eigen::MatrixXd d = lu.solve(sys.f[i]);  // point m x function
        for (int m = 0; m < np; ++m) out.gradients[m].row(i) = d.row(m);
    }
    for (const auto& p : interior) {
        out.points.push_back(p.x);
        out.weights.push_back(p.weight);
    }
    return out;
}

template <int Dim, class Functions>
SmoothedGradientField<Dim> linear_smoothed_gradients(const Subcell<Dim>& cell, Functions&& functions) {
    return linear_smoothed_gradients(cell, functions, SmoothingBasis<Dim>::for_cell(cell.kind));
}

}  // namespace lsxfem
