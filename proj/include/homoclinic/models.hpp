#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "homoclinic/types.hpp"

namespace homoclinic {

enum class ModelKind : std::uint8_t { ChuaCubic = 0, AcstCubic = 1 };

std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);

struct ModelSpec {
    ModelKind kind = ModelKind::ChuaCubic;
    double a = 0.0;
    double b = 0.0;
};

/// Model for sweep use: both parameters must be finite and strictly positive.
ModelSpec make_sweep_model(ModelKind kind, double a, double b);

namespace detail {

// Unchecked right-hand sides, inlined into the integration kernels.
inline Vec3 chua_field(double a, double b, const Vec3& s)
{
    const double x = s[0];
    return {a * (s[1] + x / 6.0 - x * x * x / 6.0), x - s[1] + s[2], -b * s[1]};
}

inline Vec3 acst_field(double a, double b, const Vec3& s)
{
    const double x = s[0];
    return {s[1], s[2], -b * s[2] - s[1] + a * x * (1.0 - x * x)};
}

inline Vec3 field(const ModelSpec& m, const Vec3& s)
{
    return m.kind == ModelKind::ChuaCubic ? chua_field(m.a, m.b, s) : acst_field(m.a, m.b, s);
}

}  // namespace detail

/// Right-hand side of the selected model. Throws NumericalError("non-finite state").
Vec3 vector_field(const ModelSpec& m, const Vec3& s);

/// Analytic Jacobian of vector_field at s.
Mat3 jacobian(const ModelSpec& m, const Vec3& s);

/// The three equilibria, origin first. The list is closed under s -> -s.
std::vector<Vec3> equilibria(const ModelSpec& m);

/// Monic characteristic polynomial x^3 + c2 x^2 + c1 x + c0 of a 3x3 matrix.
struct CharPoly {
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;

    std::complex<double> operator()(std::complex<double> x) const { return ((x + c2) * x + c1) * x + c0; }
};

CharPoly characteristic_polynomial(const Mat3& j);

/// Roots of a monic real cubic: one real root first, then a real or conjugate pair
/// (positive imaginary part second).
std::array<std::complex<double>, 3> cubic_roots(const CharPoly& p);

enum class TopoClass : std::uint8_t { StableFocusNode, SaddleFocus21, SaddleFocus12, Saddle21, Other };

std::string_view topo_class_name(TopoClass c);

struct EquilibriumReport {
    Vec3 location{};
    std::array<std::complex<double>, 3> eigenvalues{};
    TopoClass topo_class = TopoClass::Other;
    // Filled for SaddleFocus21 (lambda, -rho +- i omega) and for Saddle21, where rho is
    // taken from the leading stable eigenvalue and sigma2 is the eigenvalue sum.
    std::optional<double> lambda;
    std::optional<double> rho;
    std::optional<double> omega;
    std::optional<double> nu;
    std::optional<double> sigma1;
    std::optional<double> sigma2;
};

/// Spectrum and topological type of an equilibrium. Throws DomainError("not an equilibrium")
/// when the vector field residual at p exceeds 1e-8.
EquilibriumReport classify_equilibrium(const ModelSpec& m, const Vec3& p);

// Parameter-plane curves of the origin of the Chua model.
enum class CurveKind : std::uint8_t { NSF, NDSF, NuEqualsXi };

struct CurveSpec {
    CurveKind kind = CurveKind::NSF;
    double xi = 0.0;  // only for NuEqualsXi
};

struct VerticalLine {
    double a = 0.0;
};

using CurveValue = std::variant<double, VerticalLine>;

/// b(a) on the requested curve, or the vertical line it degenerates to (NDSF is a = 6).
/// Throws DomainError("curve undefined here") at poles and outside 0 < xi < 1, xi != 1/2.
CurveValue analytic_curve(ModelKind kind, const CurveSpec& curve, double a);

/// Asymptote a = 3/xi of the nu = xi curve.
double nu_equals_xi_asymptote(double xi);

/// b on the saddle / saddle-focus transition of the origin (zero discriminant of the
/// characteristic cubic), searched for in (b_lo, b_hi). Empty if no sign change is found.
std::optional<double> saddle_focus_transition(const ModelSpec& base, double a, double b_lo, double b_hi);

enum class Transform : std::uint8_t { Identity = 0, ChuaPolar = 1, AcstAffine = 2 };

std::string_view transform_name(Transform t);
Transform parse_transform(std::string_view name);

/// Sweep coordinates (u, v) -> model parameters (a, b).
///   ChuaPolar:  (alpha, L) -> (1.8623 + L cos alpha, 1.8743 + L sin alpha)
///   AcstAffine: (c, d)     -> (0.24 + 1.76 c + 0.55 d, 1.24 c + 0.81 d)
std::pair<double, double> param_transform(Transform t, double u, double v);

/// Inverse of param_transform. ChuaPolar returns alpha in (-pi, pi].
std::pair<double, double> inverse_param_transform(Transform t, double a, double b);

}  // namespace homoclinic
