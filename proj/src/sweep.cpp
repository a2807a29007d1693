#include "homoclinic/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <spdlog/spdlog.h>

#include "homoclinic/parallel.hpp"

namespace homoclinic {

namespace {

CellResult encode_full(const SymbolStream& s, const KneadingConfig& enc)
{
    if (s.status == StreamStatus::Escaped) {
        return {kNoValue, CellClass::Escaped, 0};
    }
    if (s.symbols.size() < enc.i) {
        return {kNoValue, CellClass::TimedOut, 0};
    }
    const KneadingValue k = kneading_invariant(s.symbols, enc);
    return {k.value, k.truncated ? CellClass::Truncated : CellClass::Ok, 0};
}

CellResult encode_one_sided(const SymbolStream& s, const KneadingConfig& enc)
{
    if (s.status == StreamStatus::Escaped) {
        return {kNoValue, CellClass::Escaped, 0};
    }
    if (s.symbols.size() < enc.i) {
        return {kNoValue, CellClass::TimedOut, 0};
    }
    const std::size_t r = enc.j - enc.i + 1;
    std::span<const std::uint8_t> tail(s.symbols.data() + (enc.i - 1), s.symbols.size() - (enc.i - 1));
    const double value = one_sided_invariant(tail, r);
    const auto n = static_cast<std::size_t>(std::lround(value * static_cast<double>(r)));
    // A run that ended while still emitting ones has an undetermined count.
    const bool resolved = n == r || n < tail.size();
    return {value, resolved ? CellClass::Ok : CellClass::Truncated, 0};
}

CellResult encode_dcp(const SymbolStream& s, const KneadingConfig& enc)
{
    const LongTermClass lt = classify_long_term(s, enc);
    switch (lt.kind) {
    case LongTermClass::Kind::Escaped:
        return {kNoValue, CellClass::Escaped, 0};
    case LongTermClass::Kind::Periodic:
    case LongTermClass::Kind::Chaotic:
        break;
    }
    if (lt.short_window) {
        return {kNoValue, CellClass::TimedOut, static_cast<std::uint32_t>(lt.lz_complexity)};
    }
    const KneadingValue k = kneading_invariant(s.symbols, enc);
    const std::uint32_t code = lt.kind == LongTermClass::Kind::Periodic
                                   ? (kPeriodicBit | static_cast<std::uint32_t>(lt.period))
                                   : static_cast<std::uint32_t>(lt.lz_complexity);
    return {k.value, k.truncated ? CellClass::Truncated : CellClass::Ok, code};
}

}  // namespace

std::string_view cell_class_name(CellClass c)
{
    switch (c) {
    case CellClass::Ok:
        return "ok";
    case CellClass::Truncated:
        return "truncated";
    case CellClass::Escaped:
        return "escaped";
    case CellClass::TimedOut:
        return "timed-out";
    case CellClass::Unstarted:
        return "unstarted";
    case CellClass::Invalid:
        return "invalid";
    }
    return "invalid";
}

void SweepConfig::validate() const
{
    if (!(u_lo < u_hi) || !(v_lo < v_hi) || !std::isfinite(u_lo) || !std::isfinite(u_hi) ||
        !std::isfinite(v_lo) || !std::isfinite(v_hi)) {
        throw DomainError("sweep ranges must be finite with lo < hi");
    }
    if (nu < 2 || nv < 2) {
        throw DomainError("sweep resolution must be at least 2 per axis");
    }
    encoding.validate();
    integration.validate();
}

std::pair<double, double> SweepConfig::cell_uv(std::uint32_t p, std::uint32_t q) const
{
    const double u = u_lo + static_cast<double>(p) * (u_hi - u_lo) / static_cast<double>(nu - 1);
    const double v = v_lo + static_cast<double>(q) * (v_hi - v_lo) / static_cast<double>(nv - 1);
    return {u, v};
}

IntegrationConfig SweepConfig::cell_integration() const
{
    IntegrationConfig ic = integration;
    ic.max_symbols = encoding.j;
    ic.stop_at_first_zero = encoding.mode == EncodingMode::OneSided && encoding.i == 1;
    return ic;
}

namespace {

struct PreparedCell {
    ModelSpec model;
    Vec3 ic{};
};

std::optional<PreparedCell> prepare_cell(const SweepConfig& cfg, double u, double v)
{
    try {
        const auto [a, b] = param_transform(cfg.transform, u, v);
        PreparedCell c{make_sweep_model(cfg.model, a, b), {}};
        c.ic = separatrix_ic(c.model, cfg.branch, cfg.integration.delta);
        return c;
    } catch (const DomainError&) {
        return std::nullopt;
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

CellResult encode_stream(const SymbolStream& s, const KneadingConfig& enc)
{
    switch (enc.mode) {
    case EncodingMode::Full:
        return encode_full(s, enc);
    case EncodingMode::OneSided:
        return encode_one_sided(s, enc);
    case EncodingMode::Dcp:
        return encode_dcp(s, enc);
    }
    return {};
}

}  // namespace

SymbolStream cell_symbols(const SweepConfig& cfg, double u, double v)
{
    const auto [a, b] = param_transform(cfg.transform, u, v);
    const ModelSpec m = make_sweep_model(cfg.model, a, b);
    const Vec3 ic = separatrix_ic(m, cfg.branch, cfg.integration.delta);
    return integrate_symbols(m, ic, cfg.cell_integration());
}

CellResult evaluate_cell(const SweepConfig& cfg, double u, double v)
{
    const auto cell = prepare_cell(cfg, u, v);
    if (!cell) {
        return {kNoValue, CellClass::Invalid, 0};
    }
    return encode_stream(integrate_symbols(cell->model, cell->ic, cfg.cell_integration()), cfg.encoding);
}

SweepGrid run_sweep(const SweepConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    const std::size_t n = std::size_t(cfg.nu) * cfg.nv;
    if (opts.order && opts.order->size() != n) {
        throw DomainError("execution order must list every cell exactly once");
    }

    SweepGrid grid;
    grid.config = cfg;
    grid.values.assign(n, kNoValue);
    grid.classes.assign(n, static_cast<std::uint8_t>(CellClass::Unstarted));
    const bool dcp = cfg.encoding.mode == EncodingMode::Dcp;
    if (dcp) {
        grid.dcp_codes.assign(n, 0);
    }

    const IntegrationConfig icfg = cfg.cell_integration();
    const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;

    // Each claimed chunk is integrated as one interleaved batch.
    parallel_chunks(n_chunks, opts.workers, 1, opts.cancel, [&](std::size_t c) {
        const std::size_t first = c * chunk;
        const std::size_t last = std::min(n, first + chunk);
        std::vector<std::size_t> cells;
        std::vector<ModelSpec> models;
        std::vector<Vec3> ics;
        for (std::size_t k = first; k < last; ++k) {
            const std::size_t idx = opts.order ? (*opts.order)[k] : k;
            const auto [u, v] = cfg.cell_uv(static_cast<std::uint32_t>(idx % cfg.nu),
                                            static_cast<std::uint32_t>(idx / cfg.nu));
            if (auto prepared = prepare_cell(cfg, u, v)) {
                cells.push_back(idx);
                models.push_back(prepared->model);
                ics.push_back(prepared->ic);
            } else {
                grid.classes[idx] = static_cast<std::uint8_t>(CellClass::Invalid);
            }
        }
        const auto streams = integrate_symbols_batch(models, ics, icfg);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const CellResult r = encode_stream(streams[k], cfg.encoding);
            grid.values[cells[k]] = r.value;
            grid.classes[cells[k]] = static_cast<std::uint8_t>(r.cls);
            if (dcp) {
                grid.dcp_codes[cells[k]] = r.dcp_code;
            }
        }
    });
    return grid;
}

BoundaryPoint refine_segment(const SweepConfig& cfg, std::pair<double, double> a, std::pair<double, double> b,
                             double tol)
{
    if (!(tol > 0.0)) {
        throw DomainError("tolerance must be positive");
    }
    const CellResult ra = evaluate_cell(cfg, a.first, a.second);
    const CellResult rb = evaluate_cell(cfg, b.first, b.second);
    if (ra.cls != CellClass::Ok || rb.cls != CellClass::Ok || ra.value == rb.value) {
        throw DomainError("no boundary");
    }

    const double du = b.first - a.first;
    const double dv = b.second - a.second;
    const double len = std::hypot(du, dv);

    BoundaryPoint out;
    double t_lo = 0.0;
    double t_hi = 1.0;
    double k_lo = ra.value;
    double k_hi = rb.value;
    for (int it = 0; it < 200 && (t_hi - t_lo) * len >= tol; ++it) {
        const double t = 0.5 * (t_lo + t_hi);
        const CellResult r = evaluate_cell(cfg, a.first + t * du, a.second + t * dv);
        ++out.probes;
        if (r.cls == CellClass::Ok && r.value == k_lo) {
            t_lo = t;
        } else if (r.cls == CellClass::Ok && r.value == k_hi) {
            t_hi = t;
        } else {
            ++out.non_robust;
            spdlog::warn("refine: non-robust probe at t={} (value {}, class {}); keeping the lower bracket", t,
                         r.value, cell_class_name(r.cls));
            t_hi = t;
            if (r.cls == CellClass::Ok) {
                k_hi = r.value;
            }
        }
    }
    const double t = 0.5 * (t_lo + t_hi);
    out.u = a.first + t * du;
    out.v = a.second + t * dv;
    out.width = (t_hi - t_lo) * len;
    out.value_a = k_lo;
    out.value_b = k_hi;
    return out;
}

BoundaryPoint refine_boundary(const SweepConfig& cfg, CellIndex cell_a, CellIndex cell_b, double tol)
{
    cfg.validate();
    if (cell_a.p >= cfg.nu || cell_b.p >= cfg.nu || cell_a.q >= cfg.nv || cell_b.q >= cfg.nv) {
        throw DomainError("cell index outside the grid");
    }
    const long dp = std::labs(static_cast<long>(cell_a.p) - static_cast<long>(cell_b.p));
    const long dq = std::labs(static_cast<long>(cell_a.q) - static_cast<long>(cell_b.q));
    if (dp + dq != 1) {
        throw DomainError("cells must be adjacent");
    }
    return refine_segment(cfg, cfg.cell_uv(cell_a.p, cell_a.q), cfg.cell_uv(cell_b.p, cell_b.q), tol);
}

}  // namespace homoclinic
