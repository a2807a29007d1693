#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "homoclinic/models.hpp"

namespace homoclinic {

enum class Branch : std::uint8_t { Gamma1 = 0, Gamma2 = 1 };

std::string_view branch_name(Branch b);
Branch parse_branch(std::string_view name);

struct IntegrationConfig {
    double dt = 0.002;
    double max_time = 1e5;
    std::size_t max_symbols = 1000;
    double esc_bound = 100.0;
    double delta = 1e-6;
    double symbol_threshold = 1.0;
    // Quadratic refinement of sampled extrema before the threshold test.
    bool refine_extrema = true;
    // A run whose state comes to rest (max-norm of the field below this value) next to a
    // stable equilibrium stops early as TimedOut with `settled` set. Zero disables the check.
    double settle_tol = 1e-10;
    // Stop as Completed at the first 0 symbol (enough for one-sided invariants).
    bool stop_at_first_zero = false;

    /// Throws DomainError on non-positive dt, delta, esc_bound, max_time or max_symbols.
    void validate() const;
};

enum class StreamStatus : std::uint8_t { Completed, Escaped, TimedOut };

struct SymbolStream {
    std::vector<std::uint8_t> symbols;
    StreamStatus status = StreamStatus::Completed;
    // For Escaped: the symbol count at the moment of escape. For TimedOut: symbols emitted.
    std::size_t status_index = 0;
    bool settled = false;
    double end_time = 0.0;
};

/// One classical RK4 step for an arbitrary autonomous field f: Vec3 -> Vec3.
template <class Field>
inline Vec3 rk4_step_with(Field&& f, const Vec3& s, double dt)
{
    const Vec3 k1 = f(s);
    const Vec3 k2 = f(s + (0.5 * dt) * k1);
    const Vec3 k3 = f(s + (0.5 * dt) * k2);
    const Vec3 k4 = f(s + dt * k3);
    const double w = dt / 6.0;
    return {s[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            s[2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])};
}

/// RK4 step of the model. Throws NumericalError("diverged") if the result is not finite.
Vec3 rk4_step(const ModelSpec& m, const Vec3& s, double dt);

/// Unit eigenvector of the single positive real eigenvalue of the origin, oriented so that
/// its x-component is positive.
Vec3 unstable_eigenvector(const ModelSpec& m);

/// Starting point delta * v (Gamma1) or -delta * v (Gamma2) on the unstable separatrix.
/// Throws DomainError("no 1D unstable direction") unless the origin has exactly one
/// eigenvalue with positive real part and that eigenvalue is real.
Vec3 separatrix_ic(const ModelSpec& m, Branch branch, double delta);

/// Integrates from ic and records 1 at maxima of x above +threshold and 0 at minima below
/// -threshold. Stops at max_symbols, on escape, or at max_time.
SymbolStream integrate_symbols(const ModelSpec& m, const Vec3& ic, const IntegrationConfig& cfg);

/// integrate_symbols for many runs of one model kind, interleaved for instruction-level
/// parallelism. Each result is bit-identical to the corresponding single run.
std::vector<SymbolStream> integrate_symbols_batch(std::span<const ModelSpec> models, std::span<const Vec3> ics,
                                                  const IntegrationConfig& cfg);

/// Continues a run past its escape for `extra_steps` steps and reports whether the max-norm
/// ever drops back below esc_bound. Returns false when the run does not escape.
bool reenters_after_escape(const ModelSpec& m, const Vec3& ic, const IntegrationConfig& cfg,
                           std::size_t extra_steps);

}  // namespace homoclinic
