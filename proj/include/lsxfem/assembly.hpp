#pragma once

/// @file assembly.hpp
/// @brief Enriched DOF numbering, element stiffness for the three
/// integration backends, global assembly, Dirichlet elimination and solve.
///
/// Global DOF order: all standard DOFs (node-major), then Heaviside DOFs of
/// J nodes in ascending node order, then tip DOFs of K nodes (node, branch
/// function, component). Element function order: the element's shape
/// functions, then shifted Heaviside functions of its J nodes, then shifted
/// tip functions of its K nodes (four per node).

#include "core.hpp"
#include "element.hpp"
#include "enrichment.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "smoothing.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace lsxfem {

template <int Dim>
inline constexpr int kStrainSize = Dim == 2 ? 3 : 6;

enum class Regime { PlaneStrain, PlaneStress, Solid };

struct Material {
    double E = 1;
    double nu = 0.3;
    Regime regime = Regime::PlaneStrain;

    void validate() const {
        if (!(E > 0)) throw ArgumentError("Young's modulus must be positive");
        if (!(nu >= 0 && nu < 0.5)) throw ArgumentError("Poisson ratio must lie in [0, 0.5)");
    }

    double shear_modulus() const { return E / (2 * (1 + nu)); }

    /// Kolosov constant.
    double kappa() const { return regime == Regime::PlaneStress ? (3 - nu) / (1 + nu) : 3 - 4 * nu; }

    /// E* in K = E* I / 2.
    double effective_modulus() const { return regime == Regime::PlaneStress ? E : E / (1 - nu * nu); }

    /// Voigt constitutive matrix; strains (xx, yy, xy) in 2D and
    /// (xx, yy, zz, xy, yz, zx) in 3D, engineering shear.
    template <int Dim>
    Eigen::Matrix<double, kStrainSize<Dim>, kStrainSize<Dim>> C() const {
        validate();
        Eigen::Matrix<double, kStrainSize<Dim>, kStrainSize<Dim>> c;
        c.setZero();
        if constexpr (Dim == 2) {
            if (regime == Regime::PlaneStress) {
                const double f = E / (1 - nu * nu);
                c << f, f * nu, 0, f * nu, f, 0, 0, 0, f * (1 - nu) / 2;
            } else {
                const double f = E / ((1 + nu) * (1 - 2 * nu));
                c << f * (1 - nu), f * nu, 0, f * nu, f * (1 - nu), 0, 0, 0, f * (1 - 2 * nu) / 2;
            }
        } else {
            const double f = E / ((1 + nu) * (1 - 2 * nu));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) c(i, j) = f * (i == j ? 1 - nu : nu);
            for (int i = 3; i < 6; ++i) c(i, i) = f * (1 - 2 * nu) / 2;
        }
        return c;
    }
};

/// Strain-displacement matrix from function gradients (Dim x nf); column
/// f*Dim + c belongs to function f, component c.
template <int Dim>
Eigen::MatrixXd strain_matrix(const Eigen::Matrix<double, Dim, Eigen::Dynamic>& g) {
    const Eigen::Index nf = g.cols();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(kStrainSize<Dim>, nf * Dim);
    for (Eigen::Index f = 0; f < nf; ++f) {
        const Eigen::Index c = f * Dim;
        if constexpr (Dim == 2) {
            b(0, c) = g(0, f);
            b(1, c + 1) = g(1, f);
            b(2, c) = g(1, f);
            b(2, c + 1) = g(0, f);
        } else {
            b(0, c) = g(0, f);
            b(1, c + 1) = g(1, f);
            b(2, c + 2) = g(2, f);
            b(3, c) = g(1, f);
            b(3, c + 1) = g(0, f);
            b(4, c + 1) = g(2, f);
            b(4, c + 2) = g(1, f);
            b(5, c) = g(2, f);
            b(5, c + 2) = g(0, f);
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// DOF numbering
// ---------------------------------------------------------------------------

struct DofMap {
    int dim = 2;
    int node_count = 0;
    std::vector<int> heaviside_first;  // per node, -1 if not in J
    std::vector<int> tip_first;        // per node, -1 if not in K
    int heaviside_count = 0;
    int tip_count = 0;
    int total = 0;

    int standard_count() const { return node_count * dim; }
    int standard(int node, int c) const { return node * dim + c; }
    int heaviside(int node, int c) const { return heaviside_first[node] + c; }
    int tip(int node, int m, int c) const { return tip_first[node] + m * dim + c; }
    bool is_standard(int dof) const { return dof < standard_count(); }
};

inline DofMap build_dofmap(int node_count, int dim, const std::vector<int>& node_set_j,
                           const std::vector<int>& node_set_k) {
    DofMap d;
    d.dim = dim;
    d.node_count = node_count;
    d.heaviside_first.assign(node_count, -1);
    d.tip_first.assign(node_count, -1);
    int next = node_count * dim;
    for (int n : node_set_j) {
        d.heaviside_first[n] = next;
        next += dim;
    }
    d.heaviside_count = next - node_count * dim;
    for (int n : node_set_k) {
        if (d.heaviside_first[n] >= 0) throw GeometryError("node in both enrichment sets");
        d.tip_first[n] = next;
        next += 4 * dim;
    }
    d.tip_count = next - node_count * dim - d.heaviside_count;
    d.total = next;
    return d;
}

inline DofMap build_dofmap(const StructuredMesh2& mesh, const ElementClassification& cls) {
    return build_dofmap(mesh.node_count(), 2, cls.node_set_j, cls.node_set_k);
}

template <int Dim>
DofMap build_dofmap(const StructuredMesh<Dim>& mesh) {
    return build_dofmap(mesh.node_count(), Dim, {}, {});
}

/// Classification of an uncracked mesh: every element Standard.
inline ElementClassification unclassified(const StructuredMesh2& mesh) {
    ElementClassification cls;
    cls.tags.assign(mesh.element_count(), ElementTag::Standard);
    cls.cuts.assign(mesh.element_count(), std::nullopt);
    cls.node_tip.assign(mesh.node_count(), -1);
    cls.element_size = mesh.element_size();
    return cls;
}

// ---------------------------------------------------------------------------
// Cracked discretization
// ---------------------------------------------------------------------------

/// Mesh, crack classification, enrichment evaluator and DOF map of one 2D
/// problem. Not copyable: the enrichment field refers to the members.
class Discretization {
public:
    Discretization(StructuredMesh2 mesh, const std::optional<CrackGeometry>& crack)
        : mesh_(std::move(mesh)),
          cls_(crack ? classify(mesh_, *crack) : unclassified(mesh_)),
          field_(mesh_, cls_),
          dofs_(build_dofmap(mesh_, cls_)) {
        find_degenerate_heaviside_nodes();
    }
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    const StructuredMesh2& mesh() const { return mesh_; }
    const ElementClassification& classification() const { return cls_; }
    const EnrichmentField& field() const { return field_; }
    const DofMap& dofmap() const { return dofs_; }
    bool cracked() const { return !cls_.crack.empty(); }

    /// J nodes whose support has relative area < 1e-4 on one side of the crack.
    const std::vector<int>& degenerate_heaviside_nodes() const { return degenerate_; }

    /// Integration subcells of element e for a backend.
    std::vector<Subcell<2>> subcells(int e, Method method) const {
        return partition(mesh_.element_coords(e), cls_.tags[e], cls_.cuts[e], method, cls_.crack, e);
    }

    /// True if element e carries no enriched node.
    bool unenriched(int e) const {
        for (int n : mesh_.elements[e])
            if (dofs_.heaviside_first[n] >= 0 || dofs_.tip_first[n] >= 0) return false;
        return true;
    }

private:
    void find_degenerate_heaviside_nodes() {
        if (cls_.node_set_j.empty()) return;
        std::vector<double> plus(mesh_.node_count(), 0.0), minus(mesh_.node_count(), 0.0);
        for (int e = 0; e < mesh_.element_count(); ++e) {
            bool touches = false;
            for (int n : mesh_.elements[e]) touches = touches || dofs_.heaviside_first[n] >= 0;
            if (!touches) continue;
            double ap = 0, am = 0;
            if (cls_.tags[e] == ElementTag::Standard) {
                const auto c = mesh_.element_coords(e);
                const double area = detail::polygon_area({c[0], c[1], c[2], c[3]});
                (signed_distance(cls_.crack, mesh_.element(e).centroid()) < 0 ? am : ap) += area;
            } else {
                for (const auto& s : subcells(e, Method::Lsm)) (s.side < 0 ? am : ap) += s.measure();
            }
            for (int n : mesh_.elements[e]) {
                plus[n] += ap;
                minus[n] += am;
            }
        }
        for (int n : cls_.node_set_j)
            if (std::min(plus[n], minus[n]) < 1e-4 * (plus[n] + minus[n])) degenerate_.push_back(n);
    }

    StructuredMesh2 mesh_;
    ElementClassification cls_;
    EnrichmentField field_;
    DofMap dofs_;
    std::vector<int> degenerate_;
};

/// Standard and enriched trial functions restricted to one element.
class ElementFunctions {
public:
    ElementFunctions(const Discretization& disc, int e)
        : disc_(&disc), iso_(disc.mesh().element_coords(e)), nodes_(disc.mesh().elements[e]) {
        const auto& d = disc.dofmap();
        for (int a = 0; a < 4; ++a)
            if (d.heaviside_first[nodes_[a]] >= 0) j_local_.push_back(a);
        for (int a = 0; a < 4; ++a)
            if (d.tip_first[nodes_[a]] >= 0) k_local_.push_back(a);
        nf_ = 4 + static_cast<int>(j_local_.size()) + 4 * static_cast<int>(k_local_.size());
        dofs_.reserve(2 * nf_);
        for (int a = 0; a < 4; ++a)
            for (int c = 0; c < 2; ++c) dofs_.push_back(d.standard(nodes_[a], c));
        for (int a : j_local_)
            for (int c = 0; c < 2; ++c) dofs_.push_back(d.heaviside(nodes_[a], c));
        for (int a : k_local_)
            for (int m = 0; m < 4; ++m)
                for (int c = 0; c < 2; ++c) dofs_.push_back(d.tip(nodes_[a], m, c));
    }

    int size() const { return nf_; }
    const std::vector<int>& dofs() const { return dofs_; }
    bool enriched() const { return nf_ > 4; }
    bool tip_enriched() const { return !k_local_.empty(); }

    /// Function values at x; `side` resolves points on the crack.
    Eigen::VectorXd values(const Vec2& x, int side) const {
        Eigen::VectorXd v(nf_);
        const Eigen::Vector4d n = iso_.shape_at(x);
        v.head<4>() = n;
        int f = 4;
        if (!j_local_.empty()) {
            const double h = disc_->field().heaviside_at(x, side);
            for (int a : j_local_) v[f++] = n[a] * (h - disc_->field().node_heaviside(nodes_[a]));
        }
        if (!k_local_.empty()) {
            const int tip = disc_->classification().node_tip[nodes_[k_local_.front()]];
            const auto b = disc_->field().tip_basis(tip, x, side, false);
            for (int a : k_local_) {
                const auto& fk = disc_->field().node_tip_values(nodes_[a]);
                for (int m = 0; m < 4; ++m) v[f++] = n[a] * (b.F[m] - fk[m]);
            }
        }
        return v;
    }

    /// Values and compatible gradients (analytic tip-function derivatives).
    void evaluate(const Vec2& x, int side, Eigen::VectorXd& v, Eigen::Matrix<double, 2, Eigen::Dynamic>& g) const {
        v.resize(nf_);
        g.resize(2, nf_);
        const Vec2 xi = iso_.inverse_map(x);
        const Eigen::Vector4d n = ParentElement<2>::shape(xi);
        const Eigen::Matrix<double, 2, 4> dn = iso_.shape_gradients(xi);
        v.head<4>() = n;
        g.leftCols<4>() = dn;
        int f = 4;
        if (!j_local_.empty()) {
            const double h = disc_->field().heaviside_at(x, side);
            for (int a : j_local_) {
                const double psi = h - disc_->field().node_heaviside(nodes_[a]);
                v[f] = n[a] * psi;
                g.col(f) = psi * dn.col(a);
                ++f;
            }
        }
        if (!k_local_.empty()) {
            const int tip = disc_->classification().node_tip[nodes_[k_local_.front()]];
            const auto b = disc_->field().tip_basis(tip, x, side, true);
            for (int a : k_local_) {
                const auto& fk = disc_->field().node_tip_values(nodes_[a]);
                for (int m = 0; m < 4; ++m) {
                    const double psi = b.F[m] - fk[m];
                    v[f] = n[a] * psi;
                    g.col(f) = psi * dn.col(a) + n[a] * b.gradF[m];
                    ++f;
                }
            }
        }
    }

    Eigen::VectorXd gather(const Eigen::VectorXd& u) const {
        Eigen::VectorXd ue(dofs_.size());
        for (std::size_t i = 0; i < dofs_.size(); ++i) ue[i] = u[dofs_[i]];
        return ue;
    }

    Vec2 displacement(const Eigen::VectorXd& u, const Vec2& x, int side) const {
        const Eigen::VectorXd v = values(x, side);
        Vec2 out = Vec2::Zero();
        for (int f = 0; f < nf_; ++f) out += v[f] * Vec2(u[dofs_[2 * f]], u[dofs_[2 * f + 1]]);
        return out;
    }

    /// Displacement and its gradient G(i, j) = du_i/dx_j.
    void displacement_and_gradient(const Eigen::VectorXd& u, const Vec2& x, int side, Vec2& disp,
                                   Eigen::Matrix2d& grad) const {
        Eigen::VectorXd v;
        Eigen::Matrix<double, 2, Eigen::Dynamic> g;
        evaluate(x, side, v, g);
        disp.setZero();
        grad.setZero();
        for (int f = 0; f < nf_; ++f) {
            const Vec2 uf(u[dofs_[2 * f]], u[dofs_[2 * f + 1]]);
            disp += v[f] * uf;
            grad += uf * g.col(f).transpose();
        }
    }

private:
    const Discretization* disc_;
    Quad4 iso_;
    std::array<int, 4> nodes_;
    std::vector<int> j_local_, k_local_;
    int nf_ = 4;
    std::vector<int> dofs_;
};

// ---------------------------------------------------------------------------
// Strain operators and element stiffness
// ---------------------------------------------------------------------------

template <int Dim>
struct StrainOperator {
    Eigen::MatrixXd B;  // strain rows x element DOFs
    double weight;
    Vec<Dim> x;
    int subcell;
    int side;
};

template <int Dim>
struct ElementIntegration {
    std::vector<int> dofs;
    std::vector<StrainOperator<Dim>> ops;
    int subcells = 0;
    int skipped_subcells = 0;
    double max_condition = 1;
};

/// Smoothed backends skip subcells with shape_quality below this.
inline constexpr double kSliverQuality = 1e-4;

namespace detail {

template <int Dim, class ValueFn, class GradFn>
ElementIntegration<Dim> integrate_element(const std::vector<Subcell<Dim>>& cells, Method method, ElementTag tag,
                                          ValueFn&& values, GradFn&& compatible) {
    ElementIntegration<Dim> out;
    out.subcells = static_cast<int>(cells.size());
    for (int s = 0; s < out.subcells; ++s) {
        const auto& cell = cells[s];
        if (method == Method::Xfem) {
            for (const auto& p : interior_points(cell, interior_rule_for(method, tag))) {
                const Eigen::Matrix<double, Dim, Eigen::Dynamic> g = compatible(p.x, cell.side);
                out.ops.push_back({strain_matrix<Dim>(g), p.weight, p.x, s, cell.side});
            }
            continue;
        }
        if (cell.shape_quality() < kSliverQuality) {
            ++out.skipped_subcells;
            continue;
        }
        const auto field = method == Method::Sm ? constant_smoothed_gradients(cell, values)
                                                : linear_smoothed_gradients(cell, values);
        out.max_condition = std::max(out.max_condition, field.condition);
        for (std::size_t m = 0; m < field.points.size(); ++m)
            out.ops.push_back({strain_matrix<Dim>(field.gradients[m]), field.weights[m], field.points[m], s, cell.side});
    }
    return out;
}

}  // namespace detail

/// Strain operators of one 2D element: compatible B at the conforming
/// quadrature points (xfem) or smoothed B per subcell / interior point (sm, lsm).
inline ElementIntegration<2> element_strain_operators(const Discretization& disc, int e, Method method) {
    const ElementFunctions fn(disc, e);
    auto values = [&](const Vec2& x, int side) { return fn.values(x, side); };
    auto compatible = [&](const Vec2& x, int side) {
        Eigen::VectorXd v;
        Eigen::Matrix<double, 2, Eigen::Dynamic> g;
        fn.evaluate(x, side, v, g);
        return g;
    };
    auto out = detail::integrate_element<2>(disc.subcells(e, method), method, disc.classification().tags[e], values,
                                            compatible);
    out.dofs = fn.dofs();
    return out;
}

/// Smoothed strain operators (sm or lsm only). Enrichment enters through
/// function values; no enrichment derivative is evaluated.
inline ElementIntegration<2> smoothed_strain_operator(const Discretization& disc, int e, Method method) {
    if (method == Method::Xfem) throw ArgumentError("smoothed strain operator needs sm or lsm");
    return element_strain_operators(disc, e, method);
}

template <int Dim>
Eigen::MatrixXd stiffness_from_operators(const ElementIntegration<Dim>& in,
                                         const Eigen::Matrix<double, kStrainSize<Dim>, kStrainSize<Dim>>& c) {
    const Eigen::Index n = static_cast<Eigen::Index>(in.dofs.size());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (const auto& op : in.ops) k.noalias() += op.weight * (op.B.transpose() * c * op.B);
    return 0.5 * (k + k.transpose());
}

inline Eigen::MatrixXd element_stiffness(const Discretization& disc, int e, Method method, const Material& mat) {
    return stiffness_from_operators<2>(element_strain_operators(disc, e, method), mat.C<2>());
}

/// Strain operators of an unenriched quad or hex element.
template <int Dim>
ElementIntegration<Dim> standard_strain_operators(const typename ParentElement<Dim>::Coords& x, Method method,
                                                  const std::vector<int>& dofs) {
    const IsoElement<Dim> iso(x);
    auto values = [&](const Vec<Dim>& p, int) -> Eigen::VectorXd { return iso.shape_at(p); };
    auto compatible = [&](const Vec<Dim>& p, int) -> Eigen::Matrix<double, Dim, Eigen::Dynamic> {
        return iso.shape_gradients(iso.inverse_map(p));
    };
    std::vector<Subcell<Dim>> cells;
    if constexpr (Dim == 2) {
        cells = method == Method::Sm ? partition_quad(x, 2, 2) : partition_quad(x, 1, 1);
    } else {
        cells = partition(x, ElementTag::Standard, method);
    }
    auto out = detail::integrate_element<Dim>(cells, method, ElementTag::Standard, values, compatible);
    out.dofs = dofs;
    return out;
}

// ---------------------------------------------------------------------------
// Global system
// ---------------------------------------------------------------------------

enum class BoundarySide { Left, Right, Bottom, Top };

/// Prescribed traction on one side of the rectangular domain.
struct EdgeTraction {
    BoundarySide side;
    std::function<Vec2(const Vec2&)> traction;
};

struct AssemblyOptions {
    int threads = 0;  // 0: hardware concurrency
    /// Merge per-thread triplet buffers in element order (bitwise reproducible).
    bool deterministic_merge = true;
};

struct AssemblyStats {
    int ill_conditioned_subcells = 0;  // moment matrix condition above 1e8
    int skipped_subcells = 0;
    double max_condition = 1;
    int eliminated_enrichment_dofs = 0;
    long interior_points = 0;
};

struct GlobalSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd F;
    std::map<int, double> constraints;
    AssemblyStats stats;

    int size() const { return static_cast<int>(F.size()); }
};

namespace detail {

inline int thread_count(int requested, int work) {
    int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(t, 1, std::max(1, work));
}

/// Runs block(e, triplets, stats) for all elements on worker threads and
/// merges the per-thread buffers.
template <class Block>
void parallel_assemble(int ne, int n, const AssemblyOptions& opt, Block&& block, GlobalSystem& sys) {
    using Triplet = Eigen::Triplet<double>;
    const int nt = thread_count(opt.threads, ne);
    std::vector<std::vector<Triplet>> buffers(nt);
    std::vector<AssemblyStats> stats(nt);
    std::vector<std::exception_ptr> errors(nt);
    std::vector<int> finish_order;
    std::mutex order_mutex;
    auto work = [&](int t) {
        const int lo = static_cast<int>(static_cast<long>(ne) * t / nt);
        const int hi = static_cast<int>(static_cast<long>(ne) * (t + 1) / nt);
        try {
            for (int e = lo; e < hi; ++e) block(e, buffers[t], stats[t]);
        } catch (...) {
            errors[t] = std::current_exception();
        }
        const std::lock_guard<std::mutex> lock(order_mutex);
        finish_order.push_back(t);
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    std::vector<int> order(nt);
    for (int t = 0; t < nt; ++t) order[t] = t;
    if (!opt.deterministic_merge) order = finish_order;
    std::vector<Triplet> all;
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    all.reserve(total);
    for (int t : order) {
        all.insert(all.end(), buffers[t].begin(), buffers[t].end());
        sys.stats.ill_conditioned_subcells += stats[t].ill_conditioned_subcells;
        sys.stats.skipped_subcells += stats[t].skipped_subcells;
        sys.stats.max_condition = std::max(sys.stats.max_condition, stats[t].max_condition);
        sys.stats.interior_points += stats[t].interior_points;
    }
    sys.K.resize(n, n);
    sys.K.setFromTriplets(all.begin(), all.end());
}

template <int Dim>
void scatter(const ElementIntegration<Dim>& in, const Eigen::MatrixXd& ke, std::vector<Eigen::Triplet<double>>& out,
             AssemblyStats& stats) {
    const auto& d = in.dofs;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j)
            if (ke(i, j) != 0) out.emplace_back(d[i], d[j], ke(i, j));
    stats.interior_points += static_cast<long>(in.ops.size());
}

}  // namespace detail

/// Consistent nodal loads of boundary tractions (3-point Gauss per edge).
inline Eigen::VectorXd traction_load(const Discretization& disc, const std::vector<EdgeTraction>& loads) {
    const auto& mesh = disc.mesh();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(disc.dofmap().total);
    const int nx = mesh.divisions[0], ny = mesh.divisions[1];
    const auto g = gauss_legendre(3);
    for (const auto& load : loads) {
        std::vector<std::pair<int, int>> edges;  // (element, local edge)
        switch (load.side) {
            case BoundarySide::Bottom:
                for (int i = 0; i < nx; ++i) edges.emplace_back(i, 0);
                break;
            case BoundarySide::Right:
                for (int j = 0; j < ny; ++j) edges.emplace_back(j * nx + nx - 1, 1);
                break;
            case BoundarySide::Top:
                for (int i = 0; i < nx; ++i) edges.emplace_back((ny - 1) * nx + i, 2);
                break;
            case BoundarySide::Left:
                for (int j = 0; j < ny; ++j) edges.emplace_back(j * nx, 3);
                break;
        }
        for (const auto& [e, k] : edges) {
            const ElementFunctions fn(disc, e);
            const auto c = mesh.element_coords(e);
            const Vec2 a = c[k], b = c[(k + 1) % 4];
            const double len = (b - a).norm();
            for (std::size_t q = 0; q < g.size(); ++q) {
                const double t = 0.5 * (1 + g.points[q][0]);
                const Vec2 x = (1 - t) * a + t * b;
                const Vec2 tr = load.traction(x);
                const Eigen::VectorXd v = fn.values(x, 1);
                const double w = 0.5 * g.weights[q] * len;
                for (int fidx = 0; fidx < fn.size(); ++fidx) {
                    f[fn.dofs()[2 * fidx]] += w * v[fidx] * tr.x();
                    f[fn.dofs()[2 * fidx + 1]] += w * v[fidx] * tr.y();
                }
            }
        }
    }
    return f;
}

/// Assembles the stiffness and traction loads of a 2D cracked problem.
/// Heaviside DOFs of degenerate-support nodes are constrained to zero.
inline GlobalSystem assemble(const Discretization& disc, Method method, const Material& mat,
                             const std::vector<EdgeTraction>& loads = {}, const AssemblyOptions& opt = {}) {
    const auto c = mat.C<2>();
    const int ne = disc.mesh().element_count();
    GlobalSystem sys;
    // every unenriched element of a structured mesh has the same stiffness
    std::optional<Eigen::MatrixXd> standard_block;
    if (ne > 0) {
        std::vector<int> dofs;
        for (int n : disc.mesh().elements[0])
            for (int k = 0; k < 2; ++k) dofs.push_back(disc.dofmap().standard(n, k));
        const auto in = standard_strain_operators<2>(disc.mesh().element_coords(0), method, dofs);
        standard_block = stiffness_from_operators<2>(in, c);
    }
    auto block = [&](int e, std::vector<Eigen::Triplet<double>>& out, AssemblyStats& stats) {
        if (disc.unenriched(e) && disc.classification().tags[e] == ElementTag::Standard) {
            ElementIntegration<2> in;
            for (int n : disc.mesh().elements[e])
                for (int k = 0; k < 2; ++k) in.dofs.push_back(disc.dofmap().standard(n, k));
            detail::scatter(in, *standard_block, out, stats);
            stats.interior_points += 4;
            return;
        }
        const auto in = element_strain_operators(disc, e, method);
        if (in.max_condition > 1e8) ++stats.ill_conditioned_subcells;
        stats.skipped_subcells += in.skipped_subcells;
        stats.max_condition = std::max(stats.max_condition, in.max_condition);
        detail::scatter(in, stiffness_from_operators<2>(in, c), out, stats);
    };
    detail::parallel_assemble(ne, disc.dofmap().total, opt, block, sys);
    sys.F = traction_load(disc, loads);
    for (int n : disc.degenerate_heaviside_nodes())
        for (int k = 0; k < 2; ++k) sys.constraints[disc.dofmap().heaviside(n, k)] = 0.0;
    sys.stats.eliminated_enrichment_dofs = 2 * static_cast<int>(disc.degenerate_heaviside_nodes().size());
    return sys;
}

/// Assembles an uncracked quad or hex mesh (no loads).
template <int Dim>
GlobalSystem assemble_standard(const StructuredMesh<Dim>& mesh, Method method, const Material& mat,
                               const AssemblyOptions& opt = {}) {
    const auto c = mat.C<Dim>();
    GlobalSystem sys;
    auto block = [&](int e, std::vector<Eigen::Triplet<double>>& out, AssemblyStats& stats) {
        std::vector<int> dofs;
        for (int n : mesh.elements[e])
            for (int k = 0; k < Dim; ++k) dofs.push_back(n * Dim + k);
        const auto in = standard_strain_operators<Dim>(mesh.element_coords(e), method, dofs);
        stats.max_condition = std::max(stats.max_condition, in.max_condition);
        detail::scatter(in, stiffness_from_operators<Dim>(in, c), out, stats);
    };
    const int n = mesh.node_count() * Dim;
    detail::parallel_assemble(mesh.element_count(), n, opt, block, sys);
    sys.F = Eigen::VectorXd::Zero(n);
    return sys;
}

// ---------------------------------------------------------------------------
// Constraints and solve
// ---------------------------------------------------------------------------

struct ReducedSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd F;
    std::vector<int> free_dofs;
    std::map<int, double> constraints;
    int full_size = 0;
};

/// Adds constraints to a system (later values win).
inline void add_constraints(GlobalSystem& sys, const std::map<int, double>& c) {
    for (const auto& [dof, value] : c) {
        if (dof < 0 || dof >= sys.size()) throw ArgumentError("constraint on a nonexistent DOF");
        sys.constraints[dof] = value;
    }
}

/// Symmetric elimination: constrained columns move to the right-hand side.
inline ReducedSystem apply_dirichlet(const GlobalSystem& sys) {
    ReducedSystem r;
    r.full_size = sys.size();
    r.constraints = sys.constraints;
    std::vector<int> map(r.full_size, -1);
    for (int i = 0; i < r.full_size; ++i)
        if (!sys.constraints.count(i)) {
            map[i] = static_cast<int>(r.free_dofs.size());
            r.free_dofs.push_back(i);
        }
    const int nf = static_cast<int>(r.free_dofs.size());
    Eigen::VectorXd uc = Eigen::VectorXd::Zero(r.full_size);
    for (const auto& [dof, v] : sys.constraints) uc[dof] = v;
    r.F.resize(nf);
    for (int i = 0; i < nf; ++i) r.F[i] = sys.F[r.free_dofs[i]];
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(sys.K.nonZeros());
    for (int col = 0; col < sys.K.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (map[i] < 0) continue;
            if (map[j] >= 0)
                t.emplace_back(map[i], map[j], it.value());
            else
                r.F[map[i]] -= it.value() * uc[j];
        }
    r.K.resize(nf, nf);
    r.K.setFromTriplets(t.begin(), t.end());
    return r;
}

struct Solution {
    Eigen::VectorXd u;
    double residual = 0;  // ||K u - F|| / ||F|| on the free DOFs
};

/// Sparse LDL^T solve of the reduced system; zero or negative pivots are
/// reported as zero-energy modes.
inline Solution solve(const ReducedSystem& r) {
    Solution s;
    s.u = Eigen::VectorXd::Zero(r.full_size);
    for (const auto& [dof, v] : r.constraints) s.u[dof] = v;
    if (r.free_dofs.empty()) return s;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(r.K);
    if (ldlt.info() != Eigen::Success) throw SolveError("factorization failed", -1);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    int zero_modes = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] <= 1e-14 * dmax) ++zero_modes;
    if (zero_modes > 0)
        throw SolveError("singular reduced stiffness: " + std::to_string(zero_modes) + " zero-energy mode(s)",
                         zero_modes);
    const Eigen::VectorXd uf = ldlt.solve(r.F);
    const double fn = r.F.norm();
    s.residual = (r.K * uf - r.F).norm() / (fn > 0 ? fn : 1.0);
    for (std::size_t i = 0; i < r.free_dofs.size(); ++i) s.u[r.free_dofs[i]] = uf[i];
    return s;
}

inline Solution solve(const GlobalSystem& sys) { return solve(apply_dirichlet(sys)); }

}  // namespace lsxfem
