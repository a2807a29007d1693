#include "homoclinic/models.hpp"

#include <algorithm>
#include <numbers>

namespace homoclinic {

namespace {

constexpr double kZeroThreshold = 1e-9;
constexpr double kEquilibriumResidual = 1e-8;

constexpr double kPolarTipA = 1.8623;
constexpr double kPolarTipB = 1.8743;

constexpr double kAffineA0 = 0.24;
constexpr double kAffineAc = 1.76;
constexpr double kAffineAd = 0.55;
constexpr double kAffineBc = 1.24;
constexpr double kAffineBd = 0.81;

double newton_polish(const CharPoly& p, double x)
{
    for (int it = 0; it < 4; ++it) {
        const double f = ((x + p.c2) * x + p.c1) * x + p.c0;
        const double df = (3.0 * x + 2.0 * p.c2) * x + p.c1;
        if (df == 0.0) {
            break;
        }
        const double step = f / df;
        if (!std::isfinite(step)) {
            break;
        }
        x -= step;
        if (std::fabs(step) <= 1e-17 * std::fmax(1.0, std::fabs(x))) {
            break;
        }
    }
    return x;
}

// Discriminant sign of the depressed cubic: positive means one real root and a complex pair.
double depressed_discriminant(const CharPoly& p)
{
    const double s = p.c2 / 3.0;
    const double dp = p.c1 - p.c2 * s;
    const double dq = 2.0 * s * s * s - s * p.c1 + p.c0;
    return 0.25 * dq * dq + dp * dp * dp / 27.0;
}

}  // namespace

std::string_view model_name(ModelKind kind)
{
    switch (kind) {
    case ModelKind::ChuaCubic:
        return "chua";
    case ModelKind::AcstCubic:
        return "acst";
    }
    return "unknown";
}

ModelKind parse_model(std::string_view name)
{
    if (name == "chua") {
        return ModelKind::ChuaCubic;
    }
    if (name == "acst") {
        return ModelKind::AcstCubic;
    }
    throw DomainError("invalid model name '" + std::string(name) + "' (expected chua or acst)");
}

ModelSpec make_sweep_model(ModelKind kind, double a, double b)
{
    if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
        throw DomainError("model parameters must be finite and positive (a=" + std::to_string(a) +
                          ", b=" + std::to_string(b) + ")");
    }
    return {kind, a, b};
}

Vec3 vector_field(const ModelSpec& m, const Vec3& s)
{
    if (!all_finite(s)) {
        throw NumericalError("non-finite state");
    }
    return detail::field(m, s);
}

Mat3 jacobian(const ModelSpec& m, const Vec3& s)
{
    if (!all_finite(s)) {
        throw NumericalError("non-finite state");
    }
    const double x = s[0];
    if (m.kind == ModelKind::ChuaCubic) {
        return {{{m.a * (1.0 / 6.0 - 0.5 * x * x), m.a, 0.0}, {1.0, -1.0, 1.0}, {0.0, -m.b, 0.0}}};
    }
    return {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {m.a * (1.0 - 3.0 * x * x), -1.0, -m.b}}};
}

std::vector<Vec3> equilibria(const ModelSpec& m)
{
    if (m.kind == ModelKind::ChuaCubic) {
        // y = 0, z = -x and x - x^3 = 0
        return {{0.0, 0.0, 0.0}, {-1.0, 0.0, 1.0}, {1.0, 0.0, -1.0}};
    }
    // y = z = 0 and a x (1 - x^2) = 0
    return {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
}

CharPoly characteristic_polynomial(const Mat3& j)
{
    const double trace = j[0][0] + j[1][1] + j[2][2];
    const double minors = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) + (j[0][0] * j[2][2] - j[0][2] * j[2][0]) +
                          (j[1][1] * j[2][2] - j[1][2] * j[2][1]);
    const double det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                       j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                       j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    return {-trace, minors, -det};
}

std::array<std::complex<double>, 3> cubic_roots(const CharPoly& p)
{
    // Depressed form t^3 + dp t + dq with x = t - c2/3.
    const double shift = p.c2 / 3.0;
    const double dp = p.c1 - p.c2 * shift;
    const double dq = 2.0 * shift * shift * shift - shift * p.c1 + p.c0;
    const double disc = 0.25 * dq * dq + dp * dp * dp / 27.0;

    double t = 0.0;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        t = std::cbrt(-0.5 * dq + sq) + std::cbrt(-0.5 * dq - sq);
    } else if (dp < 0.0) {
        const double r = std::sqrt(-dp / 3.0);
        const double arg = std::clamp(-0.5 * dq / (r * r * r), -1.0, 1.0);
        t = 2.0 * r * std::cos(std::acos(arg) / 3.0);
    } else {
        t = std::cbrt(-dq);
    }
    const double r0 = newton_polish(p, t - shift);

    // Deflate: x^3 + c2 x^2 + c1 x + c0 = (x - r0)(x^2 + qb x + qc)
    const double qb = p.c2 + r0;
    const double qc = (std::fabs(r0) > 1.0) ? -p.c0 / r0 : p.c1 + r0 * qb;
    const double qdisc = qb * qb - 4.0 * qc;

    std::array<std::complex<double>, 3> roots{};
    roots[0] = r0;
    if (qdisc >= 0.0) {
        const double q = -0.5 * (qb + std::copysign(std::sqrt(qdisc), qb));
        double r1 = q;
        double r2 = (q != 0.0) ? qc / q : 0.0;
        r1 = newton_polish(p, r1);
        r2 = newton_polish(p, r2);
        if (r1 < r2) {
            std::swap(r1, r2);
        }
        roots[1] = r1;
        roots[2] = r2;
    } else {
        std::complex<double> z(-0.5 * qb, 0.5 * std::sqrt(-qdisc));
        for (int it = 0; it < 3; ++it) {
            const std::complex<double> f = p(z);
            const std::complex<double> df = (3.0 * z + 2.0 * p.c2) * z + p.c1;
            if (std::abs(df) == 0.0) {
                break;
            }
            z -= f / df;
        }
        roots[1] = std::conj(z);
        roots[2] = z;
        if (roots[1].imag() > roots[2].imag()) {
            std::swap(roots[1], roots[2]);
        }
        // Keep the pair exactly conjugate.
        roots[1] = std::conj(roots[2]);
    }
    return roots;
}

std::string_view topo_class_name(TopoClass c)
{
    switch (c) {
    case TopoClass::StableFocusNode:
        return "stable";
    case TopoClass::SaddleFocus21:
        return "saddle-focus(2,1)";
    case TopoClass::SaddleFocus12:
        return "saddle-focus(1,2)";
    case TopoClass::Saddle21:
        return "saddle(2,1)";
    case TopoClass::Other:
        return "other";
    }
    return "other";
}

EquilibriumReport classify_equilibrium(const ModelSpec& m, const Vec3& p)
{
    const Vec3 residual = vector_field(m, p);
    if (max_norm(residual) >= kEquilibriumResidual) {
        throw DomainError("not an equilibrium");
    }

    EquilibriumReport rep;
    rep.location = p;
    const CharPoly poly = characteristic_polynomial(jacobian(m, p));
    rep.eigenvalues = cubic_roots(poly);

    int n_pos = 0;
    int n_neg = 0;
    bool boundary = false;
    bool complex_pair = false;
    for (const auto& ev : rep.eigenvalues) {
        if (std::fabs(ev.real()) < kZeroThreshold) {
            boundary = true;
        } else if (ev.real() > 0.0) {
            ++n_pos;
        } else {
            ++n_neg;
        }
        if (ev.imag() != 0.0) {
            if (std::fabs(ev.imag()) < kZeroThreshold) {
                boundary = true;
            } else {
                complex_pair = true;
            }
        }
    }
    if (boundary) {
        rep.topo_class = TopoClass::Other;
        return rep;
    }

    const double real0 = rep.eigenvalues[0].real();
    if (n_pos == 0) {
        rep.topo_class = TopoClass::StableFocusNode;
    } else if (complex_pair && n_pos == 1 && real0 > 0.0) {
        rep.topo_class = TopoClass::SaddleFocus21;
        rep.lambda = real0;
        rep.rho = -rep.eigenvalues[2].real();
        rep.omega = std::fabs(rep.eigenvalues[2].imag());
        rep.nu = *rep.rho / *rep.lambda;
        rep.sigma1 = *rep.lambda - *rep.rho;
        rep.sigma2 = *rep.lambda - 2.0 * *rep.rho;
    } else if (complex_pair && n_pos == 2 && real0 < 0.0) {
        rep.topo_class = TopoClass::SaddleFocus12;
    } else if (!complex_pair && n_pos == 1 && n_neg == 2) {
        rep.topo_class = TopoClass::Saddle21;
        std::array<double, 3> ev{rep.eigenvalues[0].real(), rep.eigenvalues[1].real(), rep.eigenvalues[2].real()};
        std::sort(ev.begin(), ev.end());
        rep.lambda = ev[2];
        rep.rho = -ev[1];
        rep.omega = 0.0;
        rep.nu = *rep.rho / *rep.lambda;
        rep.sigma1 = ev[2] + ev[1];
        rep.sigma2 = ev[0] + ev[1] + ev[2];
    } else {
        rep.topo_class = TopoClass::Other;
    }
    (void)n_neg;
    return rep;
}

CurveValue analytic_curve(ModelKind kind, const CurveSpec& curve, double a)
{
    if (kind != ModelKind::ChuaCubic) {
        throw DomainError("curve undefined here: analytic curves exist for the Chua model only");
    }
    switch (curve.kind) {
    case CurveKind::NSF:
        if (a == 3.0) {
            throw DomainError("curve undefined here: NSF has a pole at a = 3");
        }
        return (a * a - 33.0 * a + 36.0) * (a - 6.0) / (36.0 * (3.0 - a));
    case CurveKind::NDSF:
        return VerticalLine{6.0};
    case CurveKind::NuEqualsXi: {
        const double xi = curve.xi;
        if (!(xi > 0.0 && xi < 1.0) || xi == 0.5) {
            throw DomainError("curve undefined here: nu = xi requires 0 < xi < 1 and xi != 1/2");
        }
        if (a == 3.0 || a * xi == 3.0) {
            throw DomainError("curve undefined here: nu = xi has an asymptote at a = 3/xi");
        }
        const double am6 = a - 6.0;
        const double num = 7.0 * a * am6 / 12.0 - xi * am6 * am6 * am6 / (36.0 * (1.0 - 2.0 * xi) * (1.0 - 2.0 * xi));
        return num / (a * xi - 3.0);
    }
    }
    throw DomainError("curve undefined here");
}

double nu_equals_xi_asymptote(double xi)
{
    if (!(xi > 0.0 && xi < 1.0) || xi == 0.5) {
        throw DomainError("curve undefined here: nu = xi requires 0 < xi < 1 and xi != 1/2");
    }
    return 3.0 / xi;
}

std::optional<double> saddle_focus_transition(const ModelSpec& base, double a, double b_lo, double b_hi)
{
    auto disc_at = [&](double b) {
        ModelSpec m{base.kind, a, b};
        return depressed_discriminant(characteristic_polynomial(jacobian(m, {0.0, 0.0, 0.0})));
    };
    constexpr int kScan = 2000;
    double prev_b = b_lo;
    double prev_d = disc_at(b_lo);
    for (int k = 1; k <= kScan; ++k) {
        const double b = b_lo + (b_hi - b_lo) * k / kScan;
        const double d = disc_at(b);
        if ((prev_d > 0.0) != (d > 0.0)) {
            double lo = prev_b;
            double hi = b;
            const bool lo_pos = prev_d > 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::fmax(1.0, std::fabs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((disc_at(mid) > 0.0) == lo_pos) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_b = b;
        prev_d = d;
    }
    return std::nullopt;
}

std::string_view transform_name(Transform t)
{
    switch (t) {
    case Transform::Identity:
        return "identity";
    case Transform::ChuaPolar:
        return "polar";
    case Transform::AcstAffine:
        return "affine";
    }
    return "identity";
}

Transform parse_transform(std::string_view name)
{
    if (name == "identity" || name == "none") {
        return Transform::Identity;
    }
    if (name == "polar") {
        return Transform::ChuaPolar;
    }
    if (name == "affine") {
        return Transform::AcstAffine;
    }
    throw DomainError("invalid transform '" + std::string(name) + "' (expected identity, polar or affine)");
}

std::pair<double, double> param_transform(Transform t, double u, double v)
{
    switch (t) {
    case Transform::Identity:
        return {u, v};
    case Transform::ChuaPolar:
        return {kPolarTipA + v * std::cos(u), kPolarTipB + v * std::sin(u)};
    case Transform::AcstAffine:
        return {kAffineA0 + kAffineAc * u + kAffineAd * v, kAffineBc * u + kAffineBd * v};
    }
    return {u, v};
}

std::pair<double, double> inverse_param_transform(Transform t, double a, double b)
{
    switch (t) {
    case Transform::Identity:
        return {a, b};
    case Transform::ChuaPolar: {
        const double da = a - kPolarTipA;
        const double db = b - kPolarTipB;
        return {std::atan2(db, da), std::hypot(da, db)};
    }
    case Transform::AcstAffine: {
        const double det = kAffineAc * kAffineBd - kAffineAd * kAffineBc;
        const double ra = a - kAffineA0;
        return {(kAffineBd * ra - kAffineAd * b) / det, (kAffineAc * b - kAffineBc * ra) / det};
    }
    }
    return {a, b};
}

}  // namespace homoclinic
