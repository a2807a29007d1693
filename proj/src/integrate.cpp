#include "homoclinic/integrate.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace homoclinic {

namespace {

// How often (in steps) the settle test runs.
constexpr std::size_t kSettleStride = 4096;

struct ChuaField {
    double a;
    double b;
    Vec3 operator()(const Vec3& s) const { return detail::chua_field(a, b, s); }
};

struct AcstField {
    double a;
    double b;
    Vec3 operator()(const Vec3& s) const { return detail::acst_field(a, b, s); }
};

bool near_stable_equilibrium(const ModelSpec& m, const Vec3& s)
{
    const auto eqs = equilibria(m);
    const Vec3* best = &eqs[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& e : eqs) {
        const double d = max_norm(s - e);
        if (d < best_d) {
            best_d = d;
            best = &e;
        }
    }
    if (best_d > 1e-3) {
        return false;
    }
    const auto ev = cubic_roots(characteristic_polynomial(jacobian(m, *best)));
    for (const auto& z : ev) {
        if (!(z.real() < 0.0)) {
            return false;
        }
    }
    return true;
}

// Bookkeeping of one trajectory; the state itself is stepped by run_lanes so that several
// trajectories advance in one tight loop.
struct LaneLog {
    const ModelSpec* m = nullptr;
    double x_prev = 0.0;
    double x_cur = 0.0;
    bool have_prev = false;
    std::size_t step = 0;
    SymbolStream* out = nullptr;
};

constexpr std::size_t kLanes = 4;

template <class Field, std::size_t Lanes>
void run_lanes(std::span<const ModelSpec> models, std::span<const Vec3> ics, const IntegrationConfig& cfg,
               std::span<SymbolStream> out)
{
    const double dt = cfg.dt;
    const double thr = cfg.symbol_threshold;
    const double esc = cfg.esc_bound;
    const bool refine = cfg.refine_extrema;
    const bool settle = cfg.settle_tol > 0.0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / dt));

    std::array<Field, Lanes> fields{};
    std::array<Vec3, Lanes> state{};
    std::array<LaneLog, Lanes> log{};
    std::array<bool, Lanes> busy{};
    std::size_t next = 0;
    std::size_t active = 0;

    auto refill = [&](std::size_t l) {
        if (next < models.size()) {
            const ModelSpec& m = models[next];
            fields[l] = Field{m.a, m.b};
            state[l] = ics[next];
            log[l] = LaneLog{&m, ics[next][0], ics[next][0], false, 0, &out[next]};
            out[next].symbols.reserve(cfg.max_symbols);
            ++next;
            if (!busy[l]) {
                busy[l] = true;
                ++active;
            }
        } else {
            // Idle lanes keep stepping a harmless state at the origin.
            state[l] = Vec3{0.0, 0.0, 0.0};
            if (busy[l]) {
                busy[l] = false;
                --active;
            }
        }
    };
    auto finish = [&](std::size_t l, StreamStatus st, bool settled) {
        SymbolStream& o = *log[l].out;
        o.status = st;
        o.status_index = o.symbols.size();
        o.settled = settled;
        o.end_time = static_cast<double>(log[l].step) * dt;
        refill(l);
    };

    for (std::size_t l = 0; l < Lanes; ++l) {
        refill(l);
    }
    while (active > 0) {
        for (std::size_t l = 0; l < Lanes; ++l) {
            state[l] = rk4_step_with(fields[l], state[l], dt);
        }
        for (std::size_t l = 0; l < Lanes; ++l) {
            if (!busy[l]) {
                continue;
            }
            LaneLog& g = log[l];
            const Vec3& s = state[l];
            ++g.step;
            // Comparisons fail for NaN, so a non-finite state also counts as escaped.
            if (!(std::fabs(s[0]) <= esc && std::fabs(s[1]) <= esc && std::fabs(s[2]) <= esc)) {
                finish(l, StreamStatus::Escaped, false);
                continue;
            }
            const double x_next = s[0];
            if (g.have_prev) {
                const bool is_max = g.x_cur > g.x_prev && g.x_cur >= x_next;
                const bool is_min = g.x_cur < g.x_prev && g.x_cur <= x_next;
                if (is_max || is_min) {
                    double xe = g.x_cur;
                    if (refine) {
                        const double curv = x_next - 2.0 * g.x_cur + g.x_prev;
                        if (curv != 0.0) {
                            const double d = x_next - g.x_prev;
                            xe = g.x_cur - d * d / (8.0 * curv);
                        }
                    }
                    auto& sym = g.out->symbols;
                    if (is_max && xe > thr) {
                        sym.push_back(1);
                    } else if (is_min && xe < -thr) {
                        sym.push_back(0);
                        if (cfg.stop_at_first_zero) {
                            finish(l, StreamStatus::Completed, false);
                            continue;
                        }
                    }
                    if (sym.size() >= cfg.max_symbols) {
                        finish(l, StreamStatus::Completed, false);
                        continue;
                    }
                }
            }
            g.x_prev = g.x_cur;
            g.x_cur = x_next;
            g.have_prev = true;

            if (settle && g.step % kSettleStride == 0 && max_norm(fields[l](s)) < cfg.settle_tol &&
                near_stable_equilibrium(*g.m, s)) {
                finish(l, StreamStatus::TimedOut, true);
                continue;
            }
            if (g.step >= max_steps) {
                finish(l, StreamStatus::TimedOut, false);
            }
        }
    }
}

}  // namespace

std::string_view branch_name(Branch b) { return b == Branch::Gamma1 ? "gamma1" : "gamma2"; }

Branch parse_branch(std::string_view name)
{
    if (name == "gamma1" || name == "1") {
        return Branch::Gamma1;
    }
    if (name == "gamma2" || name == "2") {
        return Branch::Gamma2;
    }
    throw DomainError("invalid branch '" + std::string(name) + "' (expected gamma1 or gamma2)");
}

void IntegrationConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("dt must be positive");
    }
    if (!(delta > 0.0)) {
        throw DomainError("delta must be positive");
    }
    if (!(esc_bound > 0.0)) {
        throw DomainError("esc_bound must be positive");
    }
    if (!(max_time > 0.0)) {
        throw DomainError("max_time must be positive");
    }
    if (max_symbols < 1) {
        throw DomainError("max_symbols must be at least 1");
    }
    if (!(settle_tol >= 0.0)) {
        throw DomainError("settle_tol must be non-negative");
    }
}

Vec3 rk4_step(const ModelSpec& m, const Vec3& s, double dt)
{
    if (!all_finite(s) || !(dt > 0.0)) {
        throw DomainError("rk4_step needs a finite state and dt > 0");
    }
    const Vec3 r = rk4_step_with([&](const Vec3& x) { return detail::field(m, x); }, s, dt);
    if (!all_finite(r)) {
        throw NumericalError("diverged");
    }
    return r;
}

Vec3 unstable_eigenvector(const ModelSpec& m)
{
    const Mat3 j = jacobian(m, {0.0, 0.0, 0.0});
    const auto ev = cubic_roots(characteristic_polynomial(j));
    int n_unstable = 0;
    double lambda = 0.0;
    bool real_type = false;
    for (const auto& z : ev) {
        if (z.real() > 0.0) {
            ++n_unstable;
            lambda = z.real();
            real_type = z.imag() == 0.0;
        }
    }
    if (n_unstable != 1 || !real_type) {
        throw DomainError("no 1D unstable direction");
    }

    Mat3 a = j;
    for (int i = 0; i < 3; ++i) {
        a[i][i] -= lambda;
    }
    auto cross = [](const Vec3& u, const Vec3& v) -> Vec3 {
        return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    };
    const Vec3 c[3] = {cross(a[0], a[1]), cross(a[0], a[2]), cross(a[1], a[2])};
    const Vec3* best = &c[0];
    for (const auto& v : c) {
        if (norm2(v) > norm2(*best)) {
            best = &v;
        }
    }
    const double n = norm2(*best);
    if (!(n > 0.0)) {
        throw NumericalError("degenerate unstable eigenvector");
    }
    Vec3 v = (1.0 / n) * *best;
    if (v[0] < 0.0) {
        v = -v;
    }
    return v;
}

Vec3 separatrix_ic(const ModelSpec& m, Branch branch, double delta)
{
    const Vec3 v = delta * unstable_eigenvector(m);
    return branch == Branch::Gamma1 ? v : -v;
}

SymbolStream integrate_symbols(const ModelSpec& m, const Vec3& ic, const IntegrationConfig& cfg)
{
    std::vector<SymbolStream> out = integrate_symbols_batch({&m, 1}, {&ic, 1}, cfg);
    return std::move(out.front());
}

std::vector<SymbolStream> integrate_symbols_batch(std::span<const ModelSpec> models, std::span<const Vec3> ics,
                                                  const IntegrationConfig& cfg)
{
    cfg.validate();
    if (models.size() != ics.size()) {
        throw DomainError("one initial condition per model is required");
    }
    std::vector<SymbolStream> out(models.size());
    if (models.empty()) {
        return out;
    }
    const ModelKind kind = models.front().kind;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].kind != kind) {
            throw DomainError("a batch must use a single model kind");
        }
        if (!all_finite(ics[k])) {
            throw DomainError("non-finite initial condition");
        }
    }
    if (kind == ModelKind::ChuaCubic) {
        if (models.size() == 1) {
            run_lanes<ChuaField, 1>(models, ics, cfg, out);
        } else {
            run_lanes<ChuaField, kLanes>(models, ics, cfg, out);
        }
    } else {
        if (models.size() == 1) {
            run_lanes<AcstField, 1>(models, ics, cfg, out);
        } else {
            run_lanes<AcstField, kLanes>(models, ics, cfg, out);
        }
    }
    return out;
}

bool reenters_after_escape(const ModelSpec& m, const Vec3& ic, const IntegrationConfig& cfg,
                           std::size_t extra_steps)
{
    cfg.validate();
    const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / cfg.dt));
    auto f = [&](const Vec3& x) { return detail::field(m, x); };
    Vec3 s = ic;
    std::size_t step = 0;
    for (; step < max_steps; ++step) {
        s = rk4_step_with(f, s, cfg.dt);
        if (!(max_norm(s) <= cfg.esc_bound)) {
            break;
        }
    }
    if (step == max_steps) {
        return false;
    }
    for (std::size_t k = 0; k < extra_steps; ++k) {
        s = rk4_step_with(f, s, cfg.dt);
        if (!all_finite(s)) {
            return false;
        }
        if (max_norm(s) <= cfg.esc_bound) {
            return true;
        }
    }
    return false;
}

}  // namespace homoclinic
