#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "homoclinic/integrate.hpp"
#include "homoclinic/models.hpp"
#include "homoclinic/symbolic.hpp"

namespace homoclinic {

struct SweepConfig {
    ModelKind model = ModelKind::ChuaCubic;
    Transform transform = Transform::Identity;
    double u_lo = 0.0;
    double u_hi = 1.0;
    double v_lo = 0.0;
    double v_hi = 1.0;
    std::uint32_t nu = 2;
    std::uint32_t nv = 2;
    KneadingConfig encoding;
    IntegrationConfig integration;
    Branch branch = Branch::Gamma1;

    void validate() const;

    /// Parameter coordinates of cell (p, q): u = u_lo + p (u_hi - u_lo) / (nu - 1).
    std::pair<double, double> cell_uv(std::uint32_t p, std::uint32_t q) const;

    /// Integration settings actually used for one cell (max_symbols tied to the window).
    IntegrationConfig cell_integration() const;
};

enum class CellClass : std::uint8_t { Ok = 0, Truncated = 1, Escaped = 2, TimedOut = 3, Unstarted = 4, Invalid = 5 };

std::string_view cell_class_name(CellClass c);

/// Value stored for cells without a kneading value (escaped, unstarted, invalid).
inline constexpr double kNoValue = -1.0;

/// Dcp code layout: periodic cells carry the period with the top bit set, chaotic cells
/// carry their LZ76 count. Escaped and unstarted cells carry 0.
inline constexpr std::uint32_t kPeriodicBit = 0x80000000u;

struct SweepGrid {
    SweepConfig config;
    std::vector<double> values;
    std::vector<std::uint8_t> classes;
    std::vector<std::uint32_t> dcp_codes; // Dcp mode only

    std::size_t index(std::uint32_t p, std::uint32_t q) const { return std::size_t(q) * config.nu + p; }
    double value(std::uint32_t p, std::uint32_t q) const { return values[index(p, q)]; }
    CellClass cell_class(std::uint32_t p, std::uint32_t q) const
    {
        return static_cast<CellClass>(classes[index(p, q)]);
    }
};

struct CellResult {
    double value = kNoValue;
    CellClass cls = CellClass::Invalid;
    std::uint32_t dcp_code = 0;
};

/// Full per-cell pipeline at sweep coordinates (u, v).
CellResult evaluate_cell(const SweepConfig& cfg, double u, double v);

/// Symbol stream of the separatrix at sweep coordinates (u, v), using the sweep settings.
SymbolStream cell_symbols(const SweepConfig& cfg, double u, double v);

struct RunOptions {
    unsigned workers = 0;            // 0 selects std::thread::hardware_concurrency()
    std::size_t chunk = 64;          // cells claimed per fetch
    const std::atomic<bool>* cancel = nullptr;
    // Optional execution order of cell indices; results do not depend on it.
    const std::vector<std::size_t>* order = nullptr;
};

SweepGrid run_sweep(const SweepConfig& cfg, const RunOptions& opts = {});

struct CellIndex {
    std::uint32_t p = 0;
    std::uint32_t q = 0;
};

struct BoundaryPoint {
    double u = 0.0;
    double v = 0.0;
    double width = 0.0;     // parameter-space length of the final bracket
    double value_a = 0.0;   // kneading value at the bracket end nearest cell_a
    double value_b = 0.0;
    std::size_t probes = 0;
    std::size_t non_robust = 0;
};

/// Bisection between two parameter points with different kneading values.
/// Throws DomainError("no boundary") when the values coincide or either end is not Ok.
BoundaryPoint refine_segment(const SweepConfig& cfg, std::pair<double, double> a, std::pair<double, double> b,
                             double tol);

/// refine_segment between two adjacent cells of the grid described by cfg.
BoundaryPoint refine_boundary(const SweepConfig& cfg, CellIndex cell_a, CellIndex cell_b, double tol);

}  // namespace homoclinic
