#include <lsxfem/smoothing.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lsxfem;

namespace {

Subcell<2> triangle(const Vec2& a, const Vec2& b, const Vec2& c) {
    Subcell<2> t;
    t.kind = CellKind::Triangle;
    t.vertices = cross2(b - a, c - a) > 0 ? std::vector<Vec2>{a, b, c} : std::vector<Vec2>{a, c, b};
    return t;
}

Subcell<2> unit_square_cell() {
    return partition_quad({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}, 1, 1)[0];
}

Subcell<3> unit_hex_cell() {
    Subcell<3> h;
    h.kind = CellKind::Hex;
    const auto c = detail::box_corners(Vec3(0, 0, 0), Vec3(1, 1, 1));
    h.vertices.assign(c.begin(), c.end());
    return h;
}

template <int Dim>
auto scalar(std::function<double(const Vec<Dim>&)> f) {
    return [f](const Vec<Dim>& x, int) {
        Eigen::VectorXd v(1);
        v[0] = f(x);
        return v;
    };
}

}  // namespace

TEST(ConstantSmoothing, BilinearShapeFunctionOnUnitSquare) {
    const auto g = constant_smoothed_gradients(
        unit_square_cell(), scalar<2>([](const Vec2& x) { return (1 - x.x()) * (1 - x.y()); }));
    ASSERT_EQ(g.gradients.size(), 1u);
    EXPECT_NEAR(g.gradients[0](0, 0), -0.5, 1e-15);
    EXPECT_NEAR(g.gradients[0](1, 0), -0.5, 1e-15);
    EXPECT_NEAR(g.weights[0], 1.0, 1e-15);
}

TEST(ConstantSmoothing, ConstantAndAffineFields) {
    const auto tri = triangle(Vec2(0.1, 0.2), Vec2(1.3, 0.4), Vec2(0.5, 1.7));
    const auto hex = unit_hex_cell();
    const auto tet = detail::make_tet(Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 1, 0.1), Vec3(0.3, 0.2, 1.4), -1, 0);
    auto check2 = [](const Subcell<2>& c) {
        const auto g0 = constant_smoothed_gradients(c, scalar<2>([](const Vec2&) { return 3.7; }));
        EXPECT_LE(g0.gradients[0].norm(), 1e-14);
        const auto g1 = constant_smoothed_gradients(c, scalar<2>([](const Vec2& x) { return x.x(); }));
        EXPECT_NEAR(g1.gradients[0](0, 0), 1.0, 1e-14);
        EXPECT_NEAR(g1.gradients[0](1, 0), 0.0, 1e-14);
    };
    auto check3 = [](const Subcell<3>& c) {
        const auto g0 = constant_smoothed_gradients(c, scalar<3>([](const Vec3&) { return -2.0; }));
        EXPECT_LE(g0.gradients[0].norm(), 1e-14);
        const auto g1 = constant_smoothed_gradients(c, scalar<3>([](const Vec3& x) { return x.x(); }));
        EXPECT_NEAR(g1.gradients[0](0, 0), 1.0, 1e-14);
        EXPECT_NEAR(g1.gradients[0](1, 0), 0.0, 1e-14);
        EXPECT_NEAR(g1.gradients[0](2, 0), 0.0, 1e-14);
    };
    check2(tri);
    check2(unit_square_cell());
    check3(tet);
    check3(hex);
}

TEST(ConstantSmoothing, DegenerateCellIsGeometryError) {
    Subcell<2> flat;
    flat.kind = CellKind::Triangle;
    flat.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)};
    EXPECT_THROW(constant_smoothed_gradients(flat, scalar<2>([](const Vec2&) { return 1.0; })), GeometryError);
    EXPECT_THROW(linear_smoothed_gradients(flat, scalar<2>([](const Vec2&) { return 1.0; })), GeometryError);
}

TEST(LinearSmoothing, ReproducesAffineFields) {
    const double a = 0.7, b = -1.3, c = 2.1, d = 0.4;
    auto f2 = scalar<2>([&](const Vec2& x) { return a + b * x.x() + c * x.y(); });
    auto f3 = scalar<3>([&](const Vec3& x) { return a + b * x.x() + c * x.y() + d * x.z(); });
    for (const auto& cell : {triangle(Vec2(10.1, 5.2), Vec2(11.3, 5.4), Vec2(10.5, 6.7)), unit_square_cell()}) {
        const auto g = linear_smoothed_gradients(cell, f2);
        for (const auto& gm : g.gradients) {
            EXPECT_NEAR(gm(0, 0), b, 1e-12);
            EXPECT_NEAR(gm(1, 0), c, 1e-12);
        }
    }
    const auto tet = detail::make_tet(Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 1, 0.1), Vec3(0.3, 0.2, 1.4), -1, 0);
    for (const auto& cell : {tet, unit_hex_cell()}) {
        const auto g = linear_smoothed_gradients(cell, f3);
        EXPECT_EQ(static_cast<int>(g.points.size()), cell.kind == CellKind::Tet ? 4 : 8);
        for (const auto& gm : g.gradients) {
            EXPECT_NEAR(gm(0, 0), b, 1e-12);
            EXPECT_NEAR(gm(1, 0), c, 1e-12);
            EXPECT_NEAR(gm(2, 0), d, 1e-12);
        }
    }
}

TEST(LinearSmoothing, HatFunctionOnReferenceTriangle) {
    const auto tri = triangle(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    const auto g = linear_smoothed_gradients(tri, [](const Vec2& x, int) {
        Eigen::VectorXd v(3);
        v << 1 - x.x() - x.y(), x.x(), x.y();
        return v;
    });
    ASSERT_EQ(g.gradients.size(), 3u);
    const Eigen::Matrix<double, 2, 3> exact = (Eigen::Matrix<double, 2, 3>() << -1, 1, 0, -1, 0, 1).finished();
    for (const auto& gm : g.gradients) EXPECT_LE((gm - exact).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LinearSmoothing, BasisSizes) {
    EXPECT_EQ(SmoothingBasis<2>::for_cell(CellKind::Triangle).size(), 3);
    EXPECT_EQ(SmoothingBasis<2>::for_cell(CellKind::Quad).size(), 4);
    EXPECT_EQ(SmoothingBasis<3>::for_cell(CellKind::Tet).size(), 4);
    EXPECT_EQ(SmoothingBasis<3>::for_cell(CellKind::Hex).size(), 8);
}

TEST(LinearSmoothing, ConstantBasisEqualsConstantSmoothing) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    auto f = scalar<2>([](const Vec2& x) { return std::sin(2 * x.x()) * std::exp(x.y()); });
    for (int k = 0; k < 20; ++k) {
        const auto tri = triangle(Vec2(u(rng), u(rng)), Vec2(1 + u(rng), u(rng)), Vec2(u(rng), 1 + u(rng)));
        const auto c = constant_smoothed_gradients(tri, f);
        const auto l = linear_smoothed_gradients(tri, f, SmoothingBasis<2>::constant());
        ASSERT_EQ(l.gradients.size(), 1u);
        EXPECT_LE((c.gradients[0] - l.gradients[0]).norm(), 1e-12 * c.gradients[0].norm());
    }
}

TEST(LinearSmoothing, MismatchedBasisIsRejected) {
    const auto tri = triangle(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    EXPECT_THROW(linear_smoothed_gradients(tri, scalar<2>([](const Vec2&) { return 1.0; }),
                                           SmoothingBasis<2>::for_cell(CellKind::Quad)),
                 ArgumentError);
}

TEST(LinearSmoothing, ConsistencyResidualsOnRandomTriangles) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 lo(u(rng) * 5, u(rng) * 5);
        const Vec2 hi = lo + Vec2(0.2 + 2 * u(rng), 0.2 + 2 * u(rng));
        auto in_box = [&] { return Vec2(lo.x() + u(rng) * (hi.x() - lo.x()), lo.y() + u(rng) * (hi.y() - lo.y())); };
        const auto tri = triangle(in_box(), in_box(), in_box());
        if (tri.shape_quality() < 0.02) continue;
        const auto g = linear_smoothed_gradients(tri, [&](const Vec2& x, int) {
            Eigen::VectorXd v(4);
            for (int a = 0; a < 4; ++a) v[a] = oracle::bilinear(a, lo, hi, x);
            return v;
        });
        const std::array<Vec2, 3> v{tri.vertices[0], tri.vertices[1], tri.vertices[2]};
        const auto bnd = oracle::triangle_boundary(v);
        const auto inn = oracle::triangle_interior(v);
        for (int a = 0; a < 4; ++a)
            EXPECT_LE(oracle::consistency_residual<2>(bnd, inn, g, a,
                                                      [&](const Vec2& x) { return oracle::bilinear(a, lo, hi, x); }),
                      1e-10);
    }
}

TEST(LinearSmoothing, ConsistencyResidualsOnUnitHexTet) {
    const Vec3 lo(0, 0, 0), hi(1, 1, 1);
    for (const auto& tet : kuhn_tets(detail::box_corners(lo, hi))) {
        const auto g = linear_smoothed_gradients(tet, [&](const Vec3& x, int) {
            Eigen::VectorXd v(8);
            for (int a = 0; a < 8; ++a) v[a] = oracle::trilinear(a, lo, hi, x);
            return v;
        });
        const std::array<Vec3, 4> v{tet.vertices[0], tet.vertices[1], tet.vertices[2], tet.vertices[3]};
        const auto bnd = oracle::tet_boundary(v);
        const auto inn = oracle::tet_interior(v);
        for (int a = 0; a < 8; ++a)
            EXPECT_LE(oracle::consistency_residual<3>(bnd, inn, g, a,
                                                      [&](const Vec3& x) { return oracle::trilinear(a, lo, hi, x); }),
                      1e-10);
    }
}

TEST(LinearSmoothing, TranslationInvariance) {
    auto f = scalar<2>([](const Vec2& x) { return std::cos(x.x() - 100) * (x.y() - 50) * (x.y() - 50); });
    const auto near = triangle(Vec2(0, 0), Vec2(1, 0.2), Vec2(0.3, 0.9));
    auto far = near;
    for (auto& p : far.vertices) p += Vec2(100, 50);
    auto f0 = scalar<2>([](const Vec2& x) { return std::cos(x.x()) * x.y() * x.y(); });
    const auto a = linear_smoothed_gradients(near, f0);
    const auto b = linear_smoothed_gradients(far, f);
    for (std::size_t m = 0; m < a.gradients.size(); ++m)
        EXPECT_LE((a.gradients[m] - b.gradients[m]).norm(), 1e-10);
}
