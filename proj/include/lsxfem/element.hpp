#pragma once

/// @file element.hpp
/// @brief Bilinear quadrilateral and trilinear hexahedral parent elements.
///
/// Node numbering is counter-clockwise in 2D:
///
///     3-----2
///     |     |
///     0-----1
///
/// and in 3D the bottom face (0..3) followed by the top face (4..7).

#include "core.hpp"

#include <array>
#include <cmath>

namespace lsxfem {

template <int Dim>
struct ParentElement;

template <>
struct ParentElement<2> {
    static constexpr int kNodes = 4;
    using Coords = std::array<Vec2, kNodes>;

    static constexpr std::array<std::array<double, 2>, 4> kCorners{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};

    static Eigen::Vector4d shape(const Vec2& xi) {
        Eigen::Vector4d n;
        for (int a = 0; a < 4; ++a)
            n[a] = 0.25 * (1 + kCorners[a][0] * xi.x()) * (1 + kCorners[a][1] * xi.y());
        return n;
    }

    /// Rows are d/dxi, d/deta.
    static Eigen::Matrix<double, 2, 4> shape_derivatives(const Vec2& xi) {
        Eigen::Matrix<double, 2, 4> d;
        for (int a = 0; a < 4; ++a) {
            d(0, a) = 0.25 * kCorners[a][0] * (1 + kCorners[a][1] * xi.y());
            d(1, a) = 0.25 * kCorners[a][1] * (1 + kCorners[a][0] * xi.x());
        }
        return d;
    }
};

template <>
struct ParentElement<3> {
    static constexpr int kNodes = 8;
    using Coords = std::array<Vec3, kNodes>;

    static constexpr std::array<std::array<double, 3>, 8> kCorners{{{-1, -1, -1},
                                                                    {1, -1, -1},
                                                                    {1, 1, -1},
                                                                    {-1, 1, -1},
                                                                    {-1, -1, 1},
                                                                    {1, -1, 1},
                                                                    {1, 1, 1},
                                                                    {-1, 1, 1}}};

    static Eigen::Matrix<double, 8, 1> shape(const Vec3& xi) {
        Eigen::Matrix<double, 8, 1> n;
        for (int a = 0; a < 8; ++a)
            n[a] = 0.125 * (1 + kCorners[a][0] * xi.x()) * (1 + kCorners[a][1] * xi.y()) *
                   (1 + kCorners[a][2] * xi.z());
        return n;
    }

    static Eigen::Matrix<double, 3, 8> shape_derivatives(const Vec3& xi) {
        Eigen::Matrix<double, 3, 8> d;
        for (int a = 0; a < 8; ++a) {
            const double fx = 1 + kCorners[a][0] * xi.x();
            const double fy = 1 + kCorners[a][1] * xi.y();
            const double fz = 1 + kCorners[a][2] * xi.z();
            d(0, a) = 0.125 * kCorners[a][0] * fy * fz;
            d(1, a) = 0.125 * kCorners[a][1] * fx * fz;
            d(2, a) = 0.125 * kCorners[a][2] * fx * fy;
        }
        return d;
    }
};

/// Physical geometry of one isoparametric element.
template <int Dim>
class IsoElement {
public:
    using Parent = ParentElement<Dim>;
    static constexpr int kNodes = Parent::kNodes;
    using Coords = typename Parent::Coords;
    using Jacobian = Eigen::Matrix<double, Dim, Dim>;

    explicit IsoElement(const Coords& x) : x_(x) {}

    const Coords& coords() const { return x_; }

    Vec<Dim> map(const Vec<Dim>& xi) const {
        const auto n = Parent::shape(xi);
        Vec<Dim> p = Vec<Dim>::Zero();
        for (int a = 0; a < kNodes; ++a) p += n[a] * x_[a];
        return p;
    }

    /// J(i, j) = d x_j / d xi_i
    Jacobian jacobian(const Vec<Dim>& xi) const {
        const auto d = Parent::shape_derivatives(xi);
        Jacobian j = Jacobian::Zero();
        for (int a = 0; a < kNodes; ++a) j += d.col(a) * x_[a].transpose();
        return j;
    }

    /// Newton inversion of the isoparametric map. Exact in one step for
    /// parallelograms and axis-aligned boxes.
    Vec<Dim> inverse_map(const Vec<Dim>& x) const {
        Vec<Dim> xi = Vec<Dim>::Zero();
        const double scale = (x_[kNodes / 2] - x_[0]).norm();
        for (int it = 0; it < 50; ++it) {
            const Vec<Dim> r = map(xi) - x;
            if (r.norm() <= 1e-14 * scale && it > 0) break;
            const Jacobian j = jacobian(xi);
            xi -= j.transpose().lu().solve(r);
        }
        return xi;
    }

    /// Physical gradients of the shape functions at parent point xi (Dim x nodes).
    Eigen::Matrix<double, Dim, kNodes> shape_gradients(const Vec<Dim>& xi, double* det_j = nullptr) const {
        const Jacobian j = jacobian(xi);
        const double det = j.determinant();
        if (!(det > 0)) throw ElementQualityError("non-positive isoparametric Jacobian");
        if (det_j) *det_j = det;
        return j.inverse() * Parent::shape_derivatives(xi);
    }

    Eigen::Matrix<double, kNodes, 1> shape_at(const Vec<Dim>& x) const { return Parent::shape(inverse_map(x)); }

    Vec<Dim> centroid() const {
        Vec<Dim> c = Vec<Dim>::Zero();
        for (const auto& p : x_) c += p;
        return c / kNodes;
    }

private:
    Coords x_;
};

using Quad4 = IsoElement<2>;
using Hex8 = IsoElement<3>;

}  // namespace lsxfem
