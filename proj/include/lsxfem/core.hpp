#pragma once

/// @file core.hpp
/// @brief Shared vector aliases, method tags and the exception hierarchy.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsxfem {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

/// Integration backend used to build element stiffness matrices.
enum class Method { Xfem, Sm, Lsm };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::Xfem: return "xfem";
        case Method::Sm: return "sm";
        case Method::Lsm: return "lsm";
    }
    return "?";
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

/// Evaluation at the crack tip, where the tip-field gradients blow up.
class SingularPointError : public Error {
public:
    using Error::Error;
};

class ElementQualityError : public Error {
public:
    using Error::Error;
};

class SolveError : public Error {
public:
    SolveError(const std::string& what, int zero_energy_modes)
        : Error(what), zero_energy_modes_(zero_energy_modes) {}
    int zero_energy_modes() const { return zero_energy_modes_; }

private:
    int zero_energy_modes_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

inline Method parse_method(std::string_view s) {
    if (s == "xfem") return Method::Xfem;
    if (s == "sm") return Method::Sm;
    if (s == "lsm") return Method::Lsm;
    throw ArgumentError("unknown method '" + std::string(s) + "' (expected xfem, sm or lsm)");
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise perpendicular.
inline Vec2 perp(const Vec2& a) { return Vec2(-a.y(), a.x()); }

}  // namespace lsxfem
