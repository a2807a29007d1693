#include "homoclinic/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "homoclinic/parallel.hpp"

namespace homoclinic::theory {

namespace {

constexpr double kPi = std::numbers::pi;

double f0_sign_at(F0Signs mode, std::size_t count)
{
    switch (mode) {
    case F0Signs::AllMinus:
        return -1.0;
    case F0Signs::AllPlus:
        return 1.0;
    case F0Signs::Alternating:
        break;
    }
    return count % 2 == 0 ? -1.0 : 1.0;
}

void check_code(const Bits& code)
{
    if (code.empty() || code[0] != 1) {
        throw DomainError("homoclinic codes start with 1");
    }
    for (auto b : code) {
        if (b > 1) {
            throw DomainError("codes are binary");
        }
    }
}

bool in_region(const Bits& code, double mu, const ReturnMapParams& p, const IterateOptions& opt)
{
    return classify_mu(code, mu, p, opt) == RegionClass::Negative;
}

}  // namespace

void ReturnMapParams::validate() const
{
    if (!(B0 != 0.0) || !std::isfinite(B0)) {
        throw DomainError("B0 must be finite and non-zero");
    }
    if (!(R > 0.0)) {
        throw DomainError("R must be positive");
    }
    if (!(Omega0 > 0.0)) {
        throw DomainError("Omega0 must be positive");
    }
    if (!(nu0 > 0.0 && nu0 < 1.0)) {
        throw DomainError("nu0 must lie in (0, 1)");
    }
}

Polar local_map_T0(double phi0, double z0, const ReturnMapParams& p)
{
    if (z0 == 0.0) {
        throw DomainError("on stable manifold");
    }
    const double az = std::fabs(z0);
    if (az > p.R) {
        throw DomainError("outside the cylinder: |z0| > R");
    }
    return {p.R * std::pow(az / p.R, p.nu0), phi0 + p.Omega0 * std::log(p.R / az)};
}

double sine_term(double z, const ReturnMapParams& p)
{
    const double az = std::fabs(z);
    return p.B0 * std::pow(p.R, 1.0 - p.nu0) * std::pow(az, p.nu0) * std::sin(p.Omega0 * std::log(az) + p.phi2);
}

double map_1d(double z, double mu, const ReturnMapParams& p, double f0_sign)
{
    if (z == 0.0) {
        throw DomainError("on stable manifold");
    }
    if (z > 0.0) {
        return mu - sine_term(z, p);
    }
    return -mu + f0_sign * sine_term(z, p);
}

std::pair<double, double> map_2d(double phi, double z, double mu, const ReturnMapParams& p)
{
    if (z == 0.0) {
        throw DomainError("on stable manifold");
    }
    const double az = std::fabs(z);
    const double amp = std::pow(p.R, 1.0 - p.nu0) * std::pow(az, p.nu0);
    const double lz = p.Omega0 * std::log(az);
    if (z > 0.0) {
        return {p.a1 * mu + p.A0 * amp * std::cos(lz + p.phi1 - phi), mu - p.B0 * amp * std::sin(lz + p.phi2 - phi)};
    }
    return {kPi + p.a1 * mu - p.A0 * amp * std::cos(lz + p.phi1 - phi),
            -mu - p.B0 * amp * std::sin(lz + p.phi2 - phi)};
}

PrimaryRoots primary_roots(int n, const ReturnMapParams& p)
{
    const double branch = p.B0 > 0.0 ? 1.0 : -1.0;
    PrimaryRoots r;
    r.mu1 = std::exp((-2.0 * n * kPi - p.phi2) / p.Omega0);
    r.mu2 = std::exp((-2.0 * n * kPi + branch * kPi - p.phi2) / p.Omega0);
    r.outside_validity = r.mu1 >= p.R || r.mu2 >= p.R;
    return r;
}

double envelope_derivative(double mu, const ReturnMapParams& p)
{
    if (!(mu > 0.0)) {
        throw DomainError("envelope_derivative needs mu > 0");
    }
    const double h = std::hypot(p.nu0, p.Omega0);
    const double n2 = p.B0 * std::pow(p.R, 1.0 - p.nu0) * h;
    const double theta0 = std::atan2(p.Omega0, p.nu0);
    return n2 / std::pow(mu, 1.0 - p.nu0) * std::sin(p.Omega0 * std::log(mu) + p.phi2 + theta0);
}

CodeIterates iterate_code(const Bits& code, double mu, const ReturnMapParams& p, const IterateOptions& opt)
{
    check_code(code);
    CodeIterates out;
    out.z.reserve(code.size());
    out.z.push_back(mu);
    std::size_t f0_count = 0;
    for (std::size_t k = 1; k < code.size(); ++k) {
        const double prev = out.z.back();
        if (prev == 0.0) {
            out.feasible = false;
            out.degenerate = true;
            out.degenerate_step = k;
            return out;
        }
        const bool want_positive = code[k] == 1;
        if ((prev > 0.0) != want_positive) {
            out.feasible = false;
            out.infeasible_step = k;
            return out;
        }
        const double shift = opt.keep_mu ? mu : 0.0;
        double next = 0.0;
        if (want_positive) {
            next = shift - sine_term(prev, p);
        } else {
            next = -shift + f0_sign_at(opt.f0_signs, f0_count) * sine_term(prev, p);
            ++f0_count;
        }
        out.z.push_back(next);
    }
    return out;
}

RegionClass classify_mu(const Bits& code, double mu, const ReturnMapParams& p, const IterateOptions& opt)
{
    const CodeIterates it = iterate_code(code, mu, p, opt);
    if (!it.feasible) {
        return RegionClass::Infeasible;
    }
    return it.z.back() < 0.0 ? RegionClass::Negative : RegionClass::Positive;
}

void DiagramConfig::validate() const
{
    check_code(code);
    if (mu_lo == 0.0 || mu_hi == 0.0 || (mu_lo > 0.0) != (mu_hi > 0.0) || mu_lo == mu_hi) {
        throw DomainError("mu range endpoints must be distinct, non-zero and of one sign");
    }
    if (!(nu_lo > 0.0 && nu_hi < 1.0 && nu_lo < nu_hi)) {
        throw DomainError("nu0 range must satisfy 0 < lo < hi < 1");
    }
    if (n_mu < 2 || n_nu < 2) {
        throw DomainError("diagram resolution must be at least 2 per axis");
    }
    if (!log_mu && mu_lo > mu_hi) {
        throw DomainError("linear mu range needs lo < hi");
    }
}

double DiagramConfig::mu_at(std::uint32_t p) const
{
    const double t = static_cast<double>(p) / static_cast<double>(n_mu - 1);
    if (!log_mu) {
        return mu_lo + t * (mu_hi - mu_lo);
    }
    const double sign = mu_lo > 0.0 ? 1.0 : -1.0;
    const double a = std::log(std::fabs(mu_lo));
    const double b = std::log(std::fabs(mu_hi));
    return sign * std::exp(a + t * (b - a));
}

double DiagramConfig::nu_at(std::uint32_t q) const
{
    return nu_lo + static_cast<double>(q) * (nu_hi - nu_lo) / static_cast<double>(n_nu - 1);
}

DiagramGrid diagram_sweep(const DiagramConfig& cfg, unsigned workers, const std::atomic<bool>* cancel)
{
    cfg.validate();
    DiagramGrid g;
    g.config = cfg;
    g.classes.assign(std::size_t(cfg.n_mu) * cfg.n_nu, static_cast<std::uint8_t>(RegionClass::Infeasible));
    parallel_chunks(cfg.n_nu, workers, 1, cancel, [&](std::size_t q) {
        ReturnMapParams p = cfg.base;
        p.nu0 = cfg.nu_at(static_cast<std::uint32_t>(q));
        for (std::uint32_t k = 0; k < cfg.n_mu; ++k) {
            g.classes[q * cfg.n_mu + k] = static_cast<std::uint8_t>(classify_mu(cfg.code, cfg.mu_at(k), p, cfg.iterate));
        }
    });
    return g;
}

GridFile diagram_to_grid_file(const DiagramGrid& g)
{
    const DiagramConfig& c = g.config;
    GridFile f;
    f.model_id = kTheoryModelId;
    f.mode = kDiagramMode;
    f.nu = c.n_mu;
    f.nv = c.n_nu;
    f.u_lo = c.mu_lo;
    f.u_hi = c.mu_hi;
    f.v_lo = c.nu_lo;
    f.v_hi = c.nu_hi;
    f.i = 1;
    f.j = static_cast<std::uint32_t>(c.code.size());
    std::ostringstream ext;
    ext.precision(17);
    ext << "code=" << bits_to_string(c.code) << "\nB0=" << c.base.B0 << "\nR=" << c.base.R
        << "\nOmega0=" << c.base.Omega0 << "\nphi2=" << c.base.phi2 << "\nlog_mu=" << (c.log_mu ? 1 : 0)
        << "\nf0_signs=" << static_cast<int>(c.iterate.f0_signs) << "\nkeep_mu=" << (c.iterate.keep_mu ? 1 : 0)
        << "\n";
    f.extension = ext.str();
    f.classes = g.classes;
    f.values.reserve(g.classes.size());
    for (auto c8 : g.classes) {
        f.values.push_back(static_cast<double>(c8));
    }
    return f;
}

std::vector<MuInterval> region_intervals(const Bits& code, double mu_lo, double mu_hi, const ReturnMapParams& p,
                                         std::size_t points_per_period, double rel_tol, const IterateOptions& opt)
{
    check_code(code);
    p.validate();
    if (mu_lo == 0.0 || mu_hi == 0.0 || (mu_lo > 0.0) != (mu_hi > 0.0)) {
        throw DomainError("mu range endpoints must be non-zero and of one sign");
    }
    const double sign = mu_lo > 0.0 ? 1.0 : -1.0;
    double xa = std::log(std::fabs(mu_lo));
    double xb = std::log(std::fabs(mu_hi));
    if (xa > xb) {
        std::swap(xa, xb);
    }
    const double h = (2.0 * kPi / p.Omega0) / static_cast<double>(std::max<std::size_t>(8, points_per_period));
    const auto steps = static_cast<std::size_t>(std::ceil((xb - xa) / h));
    auto inside = [&](double x) { return in_region(code, sign * std::exp(x), p, opt); };
    auto edge = [&](double lo, double hi, bool lo_in) {
        for (int it = 0; it < 200 && hi - lo > rel_tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (inside(mid) == lo_in) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    std::vector<MuInterval> out;
    double x_prev = xa;
    bool in_prev = inside(xa);
    double start = xa;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double x = std::min(xb, xa + static_cast<double>(k) * h);
        const bool in = inside(x);
        if (in != in_prev) {
            const double e = edge(x_prev, x, in_prev);
            if (in) {
                start = e;
            } else {
                out.push_back({std::exp(start), std::exp(e), false});
            }
        }
        x_prev = x;
        in_prev = in;
    }
    if (in_prev) {
        out.push_back({std::exp(start), std::exp(xb), false});
    }
    for (auto& iv : out) {
        iv.sub_resolution = (iv.hi - iv.lo) < 1e-14 * iv.hi;
    }
    return out;
}

int period_index(double mu, const ReturnMapParams& p)
{
    const double phase = p.Omega0 * std::log(std::fabs(mu)) + p.phi2;
    return static_cast<int>(std::floor((-phase + 1.5 * kPi) / (2.0 * kPi)));
}

std::vector<ScalabilityRow> scalability_check(const Bits& code, const ReturnMapParams& p, int n_lo, int n_hi,
                                              const IterateOptions& opt)
{
    check_code(code);
    p.validate();
    if (n_hi < n_lo) {
        throw DomainError("n_hi must not be below n_lo");
    }
    const double sign = (code.size() >= 2 && code[1] == 0) || code.size() == 1 ? -1.0 : 1.0;
    const double lo = std::exp((-2.0 * n_hi * kPi - 0.5 * kPi - p.phi2) / p.Omega0);
    const double hi = std::exp((-2.0 * n_lo * kPi + 1.5 * kPi - p.phi2) / p.Omega0);
    const auto intervals = region_intervals(code, sign * lo, sign * hi, p, 200, 1e-12, opt);

    std::map<int, MuInterval> principal;
    for (const auto& iv : intervals) {
        const int n = period_index(std::sqrt(iv.lo * iv.hi), p);
        if (n < n_lo || n > n_hi) {
            continue;
        }
        auto it = principal.find(n);
        if (it == principal.end() || iv.hi - iv.lo > it->second.hi - it->second.lo) {
            principal[n] = iv;
        }
    }
    if (principal.size() < 3) {
        throw DomainError("insufficient data");
    }
    std::vector<ScalabilityRow> rows;
    for (int n = n_lo + 2; n <= n_hi; ++n) {
        auto c = principal.find(n);
        auto b = principal.find(n - 1);
        auto a = principal.find(n - 2);
        if (c == principal.end() || b == principal.end() || a == principal.end()) {
            continue;
        }
        ScalabilityRow row;
        row.n = n;
        row.interval = c->second;
        row.width_ratio = (c->second.hi - c->second.lo) / (b->second.hi - b->second.lo);
        const double d_n = b->second.lo - c->second.hi;
        const double d_prev = a->second.lo - b->second.hi;
        row.distance_ratio = d_n / d_prev;
        rows.push_back(row);
    }
    if (rows.empty()) {
        throw DomainError("insufficient data");
    }
    return rows;
}

double bar_tip_nu(double mu, const ReturnMapParams& p)
{
    return 1.0 - std::log(std::fabs(p.B0)) / (std::log(std::fabs(mu)) - std::log(p.R));
}

}  // namespace homoclinic::theory
