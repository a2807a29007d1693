#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "homoclinic/container.hpp"
#include "homoclinic/symbolic.hpp"

namespace homoclinic::theory {

/// Constants of the truncated return maps near a Shilnikov saddle-focus.
struct ReturnMapParams {
    double B0 = 0.8;
    double R = 1.0;
    double Omega0 = 3.0;
    double nu0 = 0.5;
    double phi2 = 0.0;
    double A0 = 1.0;
    double phi1 = 0.0;
    double a1 = 0.0;

    /// Throws DomainError unless B0 != 0, R > 0, Omega0 > 0 and 0 < nu0 < 1.
    void validate() const;
};

struct Polar {
    double r = 0.0;
    double theta = 0.0;
};

/// Local passage from the cylinder wall to its top (z0 > 0) or bottom (z0 < 0) disk.
Polar local_map_T0(double phi0, double z0, const ReturnMapParams& p);

/// B0 R^(1-nu0) |z|^nu0 sin(Omega0 ln|z| + phi2).
double sine_term(double z, const ReturnMapParams& p);

/// z > 0: mu - sine_term(z). z < 0: -mu + f0_sign * sine_term(z).
double map_1d(double z, double mu, const ReturnMapParams& p, double f0_sign = 1.0);

/// Two-dimensional map on the cylinder wall with dominant terms only.
std::pair<double, double> map_2d(double phi, double z, double mu, const ReturnMapParams& p);

struct PrimaryRoots {
    double mu1 = 0.0;
    double mu2 = 0.0;
    bool outside_validity = false; // a root is >= R
};

PrimaryRoots primary_roots(int n, const ReturnMapParams& p);

/// (N2 / mu^(1-nu0)) sin(Omega0 ln mu + phi2 + theta0): derivative of the sine term in mu.
double envelope_derivative(double mu, const ReturnMapParams& p);

/// Sign pattern used by successive applications of f0 along a code.
enum class F0Signs : std::uint8_t { Alternating = 0, AllMinus = 1, AllPlus = 2 };

struct IterateOptions {
    F0Signs f0_signs = F0Signs::Alternating;
    bool keep_mu = true; // keep the +-mu shift inside every f0/f1
};

struct CodeIterates {
    std::vector<double> z;        // z[0] = mu, then z_1 .. z_{l-1}
    bool feasible = true;
    std::size_t infeasible_step = 0; // k where sign(z_{k-1}) disagrees with code symbol k
    bool degenerate = false;
    std::size_t degenerate_step = 0; // k where z_{k-1} == 0 before the last iterate
};

/// Iterates z_k = f_{alpha_k}(z_{k-1}) from z_0 = mu for the code [1 alpha_1 ... alpha_{l-1}].
/// The k-th step is feasible when z_{k-1} has the side demanded by alpha_k (1: > 0, 0: < 0).
CodeIterates iterate_code(const Bits& code, double mu, const ReturnMapParams& p, const IterateOptions& opt = {});

enum class RegionClass : std::uint8_t { Infeasible = 0, Negative = 1, Positive = 2 };

/// Infeasible, or the sign of the last iterate z_{l-1} (zero counts as Positive).
RegionClass classify_mu(const Bits& code, double mu, const ReturnMapParams& p, const IterateOptions& opt = {});

struct DiagramConfig {
    Bits code{1, 1};
    double mu_lo = 1e-8;  // both endpoints share a sign
    double mu_hi = 1e-1;
    double nu_lo = 0.05;
    double nu_hi = 0.99;
    std::uint32_t n_mu = 400;
    std::uint32_t n_nu = 200;
    bool log_mu = true;
    ReturnMapParams base;
    IterateOptions iterate;

    void validate() const;
    double mu_at(std::uint32_t p) const;
    double nu_at(std::uint32_t q) const;
};

struct DiagramGrid {
    DiagramConfig config;
    std::vector<std::uint8_t> classes; // RegionClass, index q * n_mu + p with q along nu0

    RegionClass at(std::uint32_t p, std::uint32_t q) const
    {
        return static_cast<RegionClass>(classes[std::size_t(q) * config.n_mu + p]);
    }
};

DiagramGrid diagram_sweep(const DiagramConfig& cfg, unsigned workers = 0, const std::atomic<bool>* cancel = nullptr);

GridFile diagram_to_grid_file(const DiagramGrid& g);

struct MuInterval {
    double lo = 0.0; // |mu| endpoints, lo < hi
    double hi = 0.0;
    bool sub_resolution = false;
};

/// Maximal |mu| intervals in [mu_lo, mu_hi] (same sign) where the code is feasible with
/// z_{l-1} < 0, from a log-spaced scan refined by bisection to relative `rel_tol`.
std::vector<MuInterval> region_intervals(const Bits& code, double mu_lo, double mu_hi, const ReturnMapParams& p,
                                         std::size_t points_per_period = 200, double rel_tol = 1e-12,
                                         const IterateOptions& opt = {});

struct ScalabilityRow {
    int n = 0;
    MuInterval interval;
    double width_ratio = 0.0;    // w_n / w_{n-1}
    double distance_ratio = 0.0; // d_n / d_{n-1}
};

/// Principal region interval of each sine period n in [n_lo, n_hi] and the successive width and
/// distance ratios. Rows start at n_lo + 2, where both ratios are defined. Throws
/// DomainError("insufficient data") when fewer than three periods yield an interval.
std::vector<ScalabilityRow> scalability_check(const Bits& code, const ReturnMapParams& p, int n_lo, int n_hi,
                                              const IterateOptions& opt = {});

/// Sine period index n of |mu|: Omega0 ln|mu| + phi2 in (-2 n pi - pi/2, -2 n pi + 3 pi/2].
int period_index(double mu, const ReturnMapParams& p);

/// nu0 on the curve where the envelope B0 R^(1-nu0) mu^nu0 equals mu.
double bar_tip_nu(double mu, const ReturnMapParams& p);

}  // namespace homoclinic::theory
