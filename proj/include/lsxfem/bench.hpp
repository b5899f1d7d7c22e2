#pragma once

/// @file bench.hpp
/// @brief Benchmark problems, convergence tables and their serialization.
///
/// Problems (all plane strain in 2D):
///
///   griffith      10 x 10 section, tip at its centre, crack entering from
///                 the left edge; near-tip mode I displacements of a centre
///                 crack with a = 100 imposed on the whole outer boundary.
///   edge-tension  1 x 2 plate, edge crack a = 0.5 at mid-height, tension
///                 on the top and bottom edges.
///   edge-shear    7 x 16 plate, edge crack a = 3.5 at mid-height, bottom
///                 edge clamped, uniform shear on the top edge.
///   inclined      20 x 20 plate, centre crack 2a = 2 at angle beta, tension
///                 on the top and bottom edges; the end tip is reported.
///   patch3d       unit-cube hex mesh with an affine displacement imposed on
///                 the boundary nodes.

#include "assembly.hpp"
#include "core.hpp"
#include "fracture.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lsxfem {

struct BenchmarkConfig {
    std::string problem = "griffith";
    Method method = Method::Lsm;
    std::vector<int> refinements;  // empty: problem default
    double beta_deg = 0;
    std::optional<double> E;
    std::optional<double> nu;
    std::optional<double> load;
    std::string out;
    std::string report;
    bool deterministic_merge = false;
    int threads = 0;

    void validate() const;
};

struct BenchmarkRow {
    std::string problem;
    std::string method;
    double h = 0;
    long dofs = 0;
    double relL2 = std::numeric_limits<double>::quiet_NaN();
    double relH1 = std::numeric_limits<double>::quiet_NaN();
    double KI = std::numeric_limits<double>::quiet_NaN();
    double KII = std::numeric_limits<double>::quiet_NaN();
    double errKI = std::numeric_limits<double>::quiet_NaN();
    double errKII = std::numeric_limits<double>::quiet_NaN();
    long npts = 0;
    double ms = 0;
};

/// Per-level diagnostics that do not belong in the CSV.
struct LevelLog {
    int refinement = 0;
    bool ok = true;
    std::string message;
    std::vector<std::string> notes;
};

struct BenchmarkResult {
    BenchmarkConfig config;
    std::vector<BenchmarkRow> rows;
    std::vector<LevelLog> levels;
};

inline const std::vector<std::string>& known_problems() {
    static const std::vector<std::string> p{"griffith", "edge-tension", "edge-shear", "inclined", "patch3d"};
    return p;
}

inline std::vector<int> default_refinements(const std::string& problem) {
    if (problem == "griffith") return {10, 20, 40, 80};
    if (problem == "edge-tension") return {10, 20, 40};
    if (problem == "edge-shear") return {14, 28, 56};
    if (problem == "inclined") return {100};
    if (problem == "patch3d") return {1, 2};
    throw ArgumentError("unknown problem '" + problem + "'");
}

inline void BenchmarkConfig::validate() const {
    default_refinements(problem);
    for (std::size_t i = 0; i < refinements.size(); ++i) {
        if (refinements[i] < 1) throw ArgumentError("refinements must be positive");
        if (i > 0 && refinements[i] <= refinements[i - 1])
            throw ArgumentError("refinement list must be strictly increasing");
    }
    if (E && !(*E > 0)) throw ArgumentError("E must be positive");
    if (nu && !(*nu >= 0 && *nu < 0.5)) throw ArgumentError("nu must lie in [0, 0.5)");
    if (load && !(*load > 0)) throw ArgumentError("load must be positive");
    if (!(beta_deg >= 0 && beta_deg <= 90)) throw ArgumentError("beta must lie in [0, 90] degrees");
}

// ---------------------------------------------------------------------------
// Problem setup
// ---------------------------------------------------------------------------

struct ProblemInstance {
    std::unique_ptr<Discretization> disc;
    Material material;
    std::vector<EdgeTraction> loads;
    std::map<int, double> dirichlet;
    std::optional<ExactField> exact;
    int tip_index = 0;
    double KI_ref = 0;
    double KII_ref = 0;
    double K0 = 1;  // sigma sqrt(pi a), normalizes near-zero references
    double crack_length = 1;
};

namespace detail {

inline Eigen::Matrix2d tip_rotation(const CrackTip& tip) {
    Eigen::Matrix2d R;
    R.row(0) = tip.tangent.transpose();
    R.row(1) = tip.normal().transpose();
    return R;
}

/// Mode I near-tip field about the discretization's tip, global frame.
inline ExactField westergaard_field(const Discretization& disc, int tip, double KI, const Material& m) {
    const Discretization* d = &disc;
    ExactField f;
    f.displacement = [d, tip, KI, m](const Vec2& x, int side) {
        const auto p = d->field().polar(tip, x, side);
        const Eigen::Matrix2d R = tip_rotation(d->field().tips()[tip]);
        return Vec2(R.transpose() * westergaard_displacement(p.r, p.theta, KI, m.E, m.nu));
    };
    f.gradient = [d, tip, KI, m](const Vec2& x, int side) {
        const auto p = d->field().polar(tip, x, side);
        const Eigen::Matrix2d R = tip_rotation(d->field().tips()[tip]);
        const Eigen::Matrix2d g = williams_gradient(KI, 0, p.r, p.theta, m.shear_modulus(), m.kappa());
        return Eigen::Matrix2d(R.transpose() * g * R);
    };
    return f;
}

inline std::vector<int> boundary_nodes(const StructuredMesh2& mesh) {
    std::vector<int> out;
    const int nx = mesh.divisions[0], ny = mesh.divisions[1];
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            if (i == 0 || j == 0 || i == nx || j == ny) out.push_back(j * (nx + 1) + i);
    return out;
}

}  // namespace detail

inline ProblemInstance make_problem(const BenchmarkConfig& cfg, int n) {
    ProblemInstance p;
    const double pi = std::numbers::pi;
    auto material = [&](double E, double nu) {
        p.material.E = cfg.E.value_or(E);
        p.material.nu = cfg.nu.value_or(nu);
        p.material.regime = Regime::PlaneStrain;
    };
    auto minimal_supports = [&](const StructuredMesh2& mesh) {
        const int nx = mesh.divisions[0];
        const auto& d = p.disc->dofmap();
        p.dirichlet[d.standard(0, 0)] = 0;
        p.dirichlet[d.standard(0, 1)] = 0;
        p.dirichlet[d.standard(nx, 1)] = 0;
    };

    if (cfg.problem == "griffith") {
        material(1e7, 0.3);
        const double sigma = cfg.load.value_or(1e4);
        const double a = 100;
        p.crack_length = a;
        p.K0 = sigma * std::sqrt(pi * a);
        p.KI_ref = p.K0;
        auto mesh = build_structured_mesh(Box<2>{Vec2(0, 0), Vec2(10, 10)}, n, n);
        const auto crack = CrackGeometry::segment(Vec2(-10, 5), Vec2(5, 5), false, true);
        p.disc = std::make_unique<Discretization>(std::move(mesh), crack);
        p.exact = detail::westergaard_field(*p.disc, 0, p.KI_ref, p.material);
        const auto& d = p.disc->dofmap();
        for (int node : detail::boundary_nodes(p.disc->mesh())) {
            const Vec2& x = p.disc->mesh().nodes[node];
            const int side = signed_distance(p.disc->classification().crack, x) < 0 ? -1 : 1;
            const Vec2 u = p.exact->displacement(x, side);
            p.dirichlet[d.standard(node, 0)] = u.x();
            p.dirichlet[d.standard(node, 1)] = u.y();
        }
    } else if (cfg.problem == "edge-tension") {
        material(1000, 0.3);
        const double sigma = cfg.load.value_or(1.0);
        const double W = 1, L = 2, a = 0.5;
        p.crack_length = a;
        p.K0 = sigma * std::sqrt(pi * a);
        p.KI_ref = edge_reference_KI(sigma, a, W);
        auto mesh = build_structured_mesh(Box<2>{Vec2(0, 0), Vec2(W, L)}, n, 2 * n);
        const auto crack = CrackGeometry::segment(Vec2(-0.5 * W, 0.5 * L), Vec2(a, 0.5 * L), false, true);
        p.disc = std::make_unique<Discretization>(std::move(mesh), crack);
        p.loads.push_back({BoundarySide::Top, [sigma](const Vec2&) { return Vec2(0, sigma); }});
        p.loads.push_back({BoundarySide::Bottom, [sigma](const Vec2&) { return Vec2(0, -sigma); }});
        minimal_supports(p.disc->mesh());
    } else if (cfg.problem == "edge-shear") {
        material(3e7, 0.25);
        const double tau = cfg.load.value_or(1.0);
        const double W = 7, L = 16, a = 3.5;
        p.crack_length = a;
        p.K0 = tau * std::sqrt(pi * a);
        p.KI_ref = 34 * tau;
        p.KII_ref = 4.55 * tau;
        const int ny = static_cast<int>(std::lround(n * L / W));
        auto mesh = build_structured_mesh(Box<2>{Vec2(0, 0), Vec2(W, L)}, n, ny);
        const auto crack = CrackGeometry::segment(Vec2(-0.5 * W, 0.5 * L), Vec2(a, 0.5 * L), false, true);
        p.disc = std::make_unique<Discretization>(std::move(mesh), crack);
        p.loads.push_back({BoundarySide::Top, [tau](const Vec2&) { return Vec2(tau, 0); }});
        const auto& d = p.disc->dofmap();
        for (int i = 0; i <= n; ++i) {
            p.dirichlet[d.standard(i, 0)] = 0;
            p.dirichlet[d.standard(i, 1)] = 0;
        }
    } else if (cfg.problem == "inclined") {
        material(1e7, 0.3);
        const double sigma = cfg.load.value_or(1e4);
        const double a = 1, beta = cfg.beta_deg * pi / 180;
        p.crack_length = a;
        p.K0 = sigma * std::sqrt(pi * a);
        const auto ref = inclined_reference(sigma, a, beta);
        p.KI_ref = ref.KI;
        p.KII_ref = ref.KII;
        auto mesh = build_structured_mesh(Box<2>{Vec2(0, 0), Vec2(20, 20)}, n, n);
        const Vec2 c(10, 10), t(std::cos(beta), std::sin(beta));
        const auto crack = CrackGeometry::segment(c - a * t, c + a * t, true, true);
        p.disc = std::make_unique<Discretization>(std::move(mesh), crack);
        p.tip_index = 1;
        p.loads.push_back({BoundarySide::Top, [sigma](const Vec2&) { return Vec2(0, sigma); }});
        p.loads.push_back({BoundarySide::Bottom, [sigma](const Vec2&) { return Vec2(0, -sigma); }});
        minimal_supports(p.disc->mesh());
    } else {
        throw ArgumentError("problem '" + cfg.problem + "' has no 2D setup");
    }
    return p;
}

/// Extraction annulus for the reported tip of a problem.
inline ExtractionDomain problem_domain(const ProblemInstance& p) {
    const auto& disc = *p.disc;
    const auto& tip = disc.field().tips().at(p.tip_index);
    const auto e = disc.mesh().locate(tip.point);
    const auto c = disc.mesh().element_coords(e.value());
    return default_extraction_domain(disc.mesh().element_size(), (c[2] - c[0]).norm(), p.crack_length);
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
}

inline BenchmarkRow run_patch3d(const BenchmarkConfig& cfg, int n, LevelLog& log) {
    Material m;
    m.E = cfg.E.value_or(1e7);
    m.nu = cfg.nu.value_or(0.3);
    m.regime = Regime::Solid;
    const auto mesh = build_structured_mesh(Box<3>{Vec3(0, 0, 0), Vec3(1, 1, 1)}, n, n, n);
    Eigen::Matrix3d A;
    A << 1e-3, 2e-4, -3e-4, 5e-4, -2e-3, 1e-4, -4e-4, 3e-4, 1.5e-3;
    const Vec3 b(1e-3, -2e-3, 5e-4);
    auto exact = [&](const Vec3& x) -> Vec3 { return A * x + b; };

    AssemblyOptions opt{cfg.threads, cfg.deterministic_merge};
    GlobalSystem sys = assemble_standard<3>(mesh, cfg.method, m, opt);
    for (int node = 0; node < mesh.node_count(); ++node) {
        const Vec3& x = mesh.nodes[node];
        bool boundary = false;
        for (int k = 0; k < 3; ++k)
            boundary = boundary || std::abs(x[k]) < 1e-12 || std::abs(x[k] - 1) < 1e-12;
        if (!boundary) continue;
        const Vec3 u = exact(x);
        for (int k = 0; k < 3; ++k) sys.constraints[3 * node + k] = u[k];
    }
    const Solution s = solve(sys);
    log.notes.push_back("solve residual " + format_residual(s.residual));

    const auto c = m.C<3>();
    Eigen::Matrix<double, 6, 1> eps;
    eps << A(0, 0), A(1, 1), A(2, 2), A(0, 1) + A(1, 0), A(1, 2) + A(2, 1), A(2, 0) + A(0, 2);
    double el2 = 0, nl2 = 0, eh1 = 0, nh1 = 0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        std::vector<int> dofs;
        for (int node : mesh.elements[e])
            for (int k = 0; k < 3; ++k) dofs.push_back(3 * node + k);
        const auto in = standard_strain_operators<3>(mesh.element_coords(e), cfg.method, dofs);
        const Hex8 hex(mesh.element_coords(e));
        Eigen::VectorXd ue(dofs.size());
        for (std::size_t i = 0; i < dofs.size(); ++i) ue[i] = s.u[dofs[i]];
        for (const auto& op : in.ops) {
            const auto nv = hex.shape_at(op.x);
            Vec3 uh = Vec3::Zero();
            for (int a = 0; a < 8; ++a) uh += nv[a] * ue.segment<3>(3 * a);
            const Vec3 ux = exact(op.x);
            const Eigen::Matrix<double, 6, 1> de = eps - op.B * ue;
            el2 += op.weight * (ux - uh).squaredNorm();
            nl2 += op.weight * ux.squaredNorm();
            eh1 += op.weight * de.dot(c * de);
            nh1 += op.weight * eps.dot(c * eps);
        }
    }
    BenchmarkRow row;
    row.h = 1.0 / n;
    row.dofs = sys.size();
    row.relL2 = std::sqrt(el2 / nl2);
    row.relH1 = std::sqrt(eh1 / nh1);
    row.npts = sys.stats.interior_points;
    return row;
}

inline BenchmarkRow run_level_2d(const BenchmarkConfig& cfg, int n, LevelLog& log) {
    ProblemInstance p = make_problem(cfg, n);
    const auto& disc = *p.disc;
    const auto& cls = disc.classification();
    AssemblyOptions opt{cfg.threads, cfg.deterministic_merge};
    GlobalSystem sys = assemble(disc, cfg.method, p.material, p.loads, opt);
    add_constraints(sys, p.dirichlet);
    const Solution s = solve(sys);

    std::ostringstream tags;
    tags << "elements: " << cls.count(ElementTag::Standard) << " standard, " << cls.count(ElementTag::Split)
         << " split, " << cls.count(ElementTag::Tip) << " tip; |J| = " << cls.node_set_j.size()
         << ", |K| = " << cls.node_set_k.size();
    log.notes.push_back(tags.str());
    if (cls.perturbed) log.notes.push_back("crack perturbed off the grid (degeneracy rule)");
    if (sys.stats.eliminated_enrichment_dofs > 0)
        log.notes.push_back(std::to_string(sys.stats.eliminated_enrichment_dofs) +
                            " Heaviside DOFs constrained to zero (support area ratio < 1e-4)");
    if (sys.stats.ill_conditioned_subcells > 0)
        log.notes.push_back(std::to_string(sys.stats.ill_conditioned_subcells) +
                            " elements with moment-matrix condition > 1e8");
    if (sys.stats.skipped_subcells > 0)
        log.notes.push_back(std::to_string(sys.stats.skipped_subcells) + " sliver subcells skipped by smoothing");
    log.notes.push_back("solve residual " + format_residual(s.residual));

    BenchmarkRow row;
    row.h = disc.mesh().element_size();
    row.dofs = disc.dofmap().total;
    row.npts = sys.stats.interior_points;
    if (p.exact) {
        const auto norms = error_norms(disc, s.u, cfg.method, p.material, *p.exact);
        row.relL2 = norms.relL2;
        row.relH1 = norms.relH1;
    }
    const auto dom = problem_domain(p);
    const auto sif = extract_sifs(disc, s.u, p.tip_index, p.material, dom);
    row.KI = sif.KI;
    row.KII = sif.KII;
    row.errKI = sif_error(sif.KI, p.KI_ref, p.K0);
    row.errKII = sif_error(sif.KII, p.KII_ref, p.K0);
    std::ostringstream d;
    d << "extraction annulus [" << dom.r_inner << ", " << dom.r_outer
      << "], plateau deviation " << sif.plateau_deviation;
    log.notes.push_back(d.str());
    return row;
}

}  // namespace detail

/// Runs every refinement level of a configuration. A failing level is
/// logged and skipped; the remaining levels still run.
inline BenchmarkResult run(const BenchmarkConfig& cfg) {
    cfg.validate();
    BenchmarkResult result;
    result.config = cfg;
    const auto levels = cfg.refinements.empty() ? default_refinements(cfg.problem) : cfg.refinements;
    for (int n : levels) {
        LevelLog log;
        log.refinement = n;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            BenchmarkRow row = cfg.problem == "patch3d" ? detail::run_patch3d(cfg, n, log)
                                                        : detail::run_level_2d(cfg, n, log);
            const auto t1 = std::chrono::steady_clock::now();
            row.problem = cfg.problem;
            row.method = std::string(to_string(cfg.method));
            row.ms = cfg.deterministic_merge ? 0.0 : std::chrono::duration<double, std::milli>(t1 - t0).count();
            result.rows.push_back(row);
        } catch (const Error& e) {
            log.ok = false;
            log.message = e.what();
        }
        result.levels.push_back(std::move(log));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Rates and serialization
// ---------------------------------------------------------------------------

/// Least-squares slope of log(error) against log(h) over rows with finite,
/// positive errors.
inline double convergence_rate(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size()) throw ArgumentError("h and error columns differ in length");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] > 0 && err[i] > 0 && std::isfinite(err[i])) {
            x.push_back(std::log(h[i]));
            y.push_back(std::log(err[i]));
        }
    if (x.size() < 2) throw InsufficientDataError("convergence rate needs at least two rows with positive errors");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) throw InsufficientDataError("convergence rate needs at least two distinct element sizes");
    return (n * sxy - sx * sy) / den;
}

inline double convergence_rate(const std::vector<BenchmarkRow>& rows, double BenchmarkRow::*column) {
    std::vector<double> h, e;
    for (const auto& r : rows) {
        h.push_back(r.h);
        e.push_back(r.*column);
    }
    return convergence_rate(h, e);
}

/// Slopes of every error column that has enough data.
inline std::map<std::string, double> convergence_rates(const std::vector<BenchmarkRow>& rows) {
    const std::vector<std::pair<std::string, double BenchmarkRow::*>> cols{
        {"relL2", &BenchmarkRow::relL2}, {"relH1", &BenchmarkRow::relH1},
        {"errKI", &BenchmarkRow::errKI}, {"errKII", &BenchmarkRow::errKII}};
    std::map<std::string, double> out;
    for (const auto& [name, col] : cols) {
        try {
            out[name] = convergence_rate(rows, col);
        } catch (const InsufficientDataError&) {
        }
    }
    return out;
}

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kCsvHeader = "problem,method,h,dofs,relL2,relH1,KI,KII,errKI,errKII,npts,ms";

inline std::string to_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.problem << ',' << r.method << ',' << format_number(r.h) << ',' << r.dofs << ','
           << format_number(r.relL2) << ',' << format_number(r.relH1) << ',' << format_number(r.KI) << ','
           << format_number(r.KII) << ',' << format_number(r.errKI) << ',' << format_number(r.errKII) << ','
           << r.npts << ',' << format_number(r.ms) << '\n';
    }
    return os.str();
}

inline std::string to_report(const BenchmarkResult& res) {
    std::ostringstream os;
    const auto& c = res.config;
    os << "problem " << c.problem << ", method " << to_string(c.method);
    if (c.problem == "inclined") os << ", beta " << c.beta_deg << " deg";
    os << "\n\n";
    for (std::size_t i = 0; i < res.levels.size(); ++i) {
        const auto& l = res.levels[i];
        os << "level n = " << l.refinement << (l.ok ? "" : "  FAILED: " + l.message) << '\n';
        for (const auto& note : l.notes) os << "  " << note << '\n';
    }
    os << '\n';
    for (const auto& r : res.rows)
        os << "h = " << format_number(r.h) << "  dofs = " << r.dofs << "  relL2 = " << format_number(r.relL2)
           << "  relH1 = " << format_number(r.relH1) << "  KI = " << format_number(r.KI)
           << "  KII = " << format_number(r.KII) << "  errKI = " << format_number(r.errKI)
           << "  errKII = " << format_number(r.errKII) << "  npts = " << r.npts << '\n';
    const auto rates = convergence_rates(res.rows);
    if (!rates.empty()) {
        os << "\nconvergence rates (slope of log error vs log h)\n";
        for (const auto& [name, slope] : rates) os << "  " << name << ": " << format_number(slope) << '\n';
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
    f << text;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<int> parse_refinements(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(item, &pos);
        } catch (const std::exception&) {
            throw ArgumentError("invalid refinement '" + item + "'");
        }
        if (pos != item.size()) throw ArgumentError("invalid refinement '" + item + "'");
        out.push_back(v);
    }
    return out;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ArgumentError("invalid boolean '" + v + "'");
}

/// Applies one key = value setting. Keys mirror the CLI flags.
inline void apply_setting(BenchmarkConfig& cfg, const std::string& key, const std::string& value) {
    auto number = [&] {
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw ArgumentError("invalid number for '" + key + "': " + value);
        }
    };
    if (key == "problem")
        cfg.problem = value;
    else if (key == "method")
        cfg.method = parse_method(value);
    else if (key == "refinements")
        cfg.refinements = parse_refinements(value);
    else if (key == "beta")
        cfg.beta_deg = number();
    else if (key == "E")
        cfg.E = number();
    else if (key == "nu")
        cfg.nu = number();
    else if (key == "load")
        cfg.load = number();
    else if (key == "out")
        cfg.out = value;
    else if (key == "report")
        cfg.report = value;
    else if (key == "deterministic-merge")
        cfg.deterministic_merge = parse_bool(value);
    else if (key == "threads")
        cfg.threads = static_cast<int>(number());
    else
        throw ArgumentError("unknown config key '" + key + "'");
}

/// Parses flat `key = value` text; `#` starts a comment.
inline BenchmarkConfig parse_config(const std::string& text, BenchmarkConfig cfg = {}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline BenchmarkConfig load_config(const std::string& path, BenchmarkConfig cfg = {}) {
    std::ifstream f(path);
    if (!f) throw ArgumentError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(cfg));
}

}  // namespace lsxfem
