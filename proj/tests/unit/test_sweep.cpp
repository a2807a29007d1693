#include <algorithm>
#include <cstring>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "homoclinic/sweep.hpp"

using namespace homoclinic;
using testing_support::Rng;

namespace {

SweepConfig polar_row(double alpha_lo, double alpha_hi, std::uint32_t nu, std::size_t j = 3)
{
    SweepConfig c;
    c.model = ModelKind::ChuaCubic;
    c.transform = Transform::ChuaPolar;
    c.u_lo = alpha_lo;
    c.u_hi = alpha_hi;
    c.v_lo = 9.995;
    c.v_hi = 10.005;
    c.nu = nu;
    c.nv = 2;
    c.encoding.i = 1;
    c.encoding.j = j;
    return c;
}

bool same_grid(const SweepGrid& a, const SweepGrid& b)
{
    return a.classes == b.classes && a.dcp_codes == b.dcp_codes &&
           std::equal(a.values.begin(), a.values.end(), b.values.begin(), b.values.end(),
                      [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
}

}  // namespace

TEST_CASE("cell coordinates follow the grid formula")
{
    SweepConfig c;
    c.u_lo = 1.0;
    c.u_hi = 2.0;
    c.v_lo = -1.0;
    c.v_hi = 3.0;
    c.nu = 5;
    c.nv = 3;
    CHECK(c.cell_uv(0, 0) == std::pair<double, double>{1.0, -1.0});
    CHECK(c.cell_uv(4, 2) == std::pair<double, double>{2.0, 3.0});
    CHECK(c.cell_uv(1, 1).first == doctest::Approx(1.25));
    CHECK(c.cell_uv(1, 1).second == doctest::Approx(1.0));
}

TEST_CASE("sweep config validation")
{
    SweepConfig c;
    CHECK_NOTHROW(c.validate());
    c.u_hi = c.u_lo;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.nv = 1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.encoding.q = 1.5;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.integration.dt = -0.1;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("2x2 grid run twice is bit-identical")
{
    SweepConfig c = polar_row(0.86, 0.89, 2);
    const auto a = run_sweep(c);
    const auto b = run_sweep(c);
    CHECK(same_grid(a, b));
    CHECK(a.values.size() == 4);
}

TEST_CASE("property: results do not depend on execution order or worker count")
{
    SweepConfig c;
    c.transform = Transform::ChuaPolar;
    c.u_lo = 0.8;
    c.u_hi = 1.05;
    c.v_lo = 2.0;
    c.v_hi = 15.0;
    c.nu = 9;
    c.nv = 7;
    c.encoding.j = 6;
    RunOptions serial;
    serial.workers = 1;
    const auto ref = run_sweep(c, serial);

    Rng rng(31);
    for (int t = 0; t < 3; ++t) {
        std::vector<std::size_t> order(std::size_t(c.nu) * c.nv);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
        RunOptions opt;
        opt.workers = 1 + static_cast<unsigned>(rng.below(4));
        opt.chunk = 1 + rng.below(9);
        opt.order = &order;
        CHECK(same_grid(ref, run_sweep(c, opt)));
    }
}

TEST_CASE("kneading value changes across the [10] boundary at L = 9.995")
{
    const auto g = run_sweep(polar_row(0.86, 0.89, 4));
    std::set<double> row;
    for (std::uint32_t p = 0; p < 4; ++p) {
        CHECK(g.cell_class(p, 0) == CellClass::Ok);
        row.insert(g.value(p, 0));
    }
    CHECK(row.size() >= 2);
    CHECK(g.value(0, 0) != g.value(3, 0));
}

TEST_CASE("small-a stable regime gives a constant 5x5 patch")
{
    SweepConfig c;
    c.u_lo = 3.4;
    c.u_hi = 3.6;
    c.v_lo = 5.8;
    c.v_hi = 6.2;
    c.nu = 5;
    c.nv = 5;
    c.encoding.j = 10;
    const auto g = run_sweep(c);
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        CHECK(g.classes[k] == static_cast<std::uint8_t>(CellClass::Ok));
        CHECK(g.values[k] == g.values[0]);
    }
    CHECK(g.values[0] == 1.0 - std::ldexp(1.0, -10));
}

TEST_CASE("values lie in [0, 1] or carry the sentinel")
{
    SweepConfig c;
    c.model = ModelKind::AcstCubic;
    c.transform = Transform::AcstAffine;
    c.u_lo = 0.25;
    c.u_hi = 1.0;
    c.v_lo = -0.5;
    c.v_hi = 0.5;
    c.nu = 6;
    c.nv = 6;
    c.encoding.j = 8;
    const auto g = run_sweep(c);
    std::size_t escaped = 0;
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        const auto cls = static_cast<CellClass>(g.classes[k]);
        if (cls == CellClass::Ok || cls == CellClass::Truncated) {
            CHECK(g.values[k] >= 0.0);
            CHECK(g.values[k] <= 1.0);
        } else {
            CHECK(g.values[k] == kNoValue);
        }
        escaped += cls == CellClass::Escaped;
    }
    CHECK(escaped > 0);
}

TEST_CASE("one-sided sweep reports leading-one fractions")
{
    SweepConfig c = polar_row(0.8, 1.05, 6, 8);
    c.encoding.mode = EncodingMode::OneSided;
    const auto g = run_sweep(c);
    const std::size_t r = 8;
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        if (g.classes[k] != static_cast<std::uint8_t>(CellClass::Ok)) continue;
        const double n = g.values[k] * double(r);
        CHECK(n == std::round(n));
        const auto [u, v] = c.cell_uv(static_cast<std::uint32_t>(k % c.nu), static_cast<std::uint32_t>(k / c.nu));
        SweepConfig full = c;
        full.encoding.mode = EncodingMode::Full;
        full.encoding.j = 40;
        const auto s = cell_symbols(full, u, v);
        std::size_t ones = 0;
        while (ones < s.symbols.size() && ones < r && s.symbols[ones] == 1) ++ones;
        CHECK(std::size_t(std::lround(n)) == ones);
    }
}

TEST_CASE("dcp sweep stores periods with the periodic bit")
{
    SweepConfig c;
    c.u_lo = 3.9;
    c.u_hi = 8.0;
    c.v_lo = 6.0;
    c.v_hi = 6.5;
    c.nu = 2;
    c.nv = 2;
    c.encoding = KneadingConfig::dcp_default();
    const auto g = run_sweep(c);
    REQUIRE(g.dcp_codes.size() == 4);
    CHECK(g.dcp_codes[g.index(0, 0)] == (kPeriodicBit | 1u));
    CHECK(g.dcp_codes[g.index(1, 0)] == (kPeriodicBit | 2u));
}

TEST_CASE("cancellation leaves unstarted cells")
{
    const std::atomic<bool> cancel{true};
    RunOptions opt;
    opt.cancel = &cancel;
    const auto g = run_sweep(polar_row(0.86, 0.89, 3), opt);
    for (auto c : g.classes) CHECK(c == static_cast<std::uint8_t>(CellClass::Unstarted));
    for (auto v : g.values) CHECK(v == kNoValue);
}

TEST_CASE("refine_boundary honours the tolerance and keeps distinct end values")
{
    const auto c = polar_row(0.86, 0.89, 4);
    const auto g = run_sweep(c);
    std::uint32_t p = 0;
    while (p + 1 < c.nu && g.value(p, 0) == g.value(p + 1, 0)) ++p;
    REQUIRE(p + 1 < c.nu);
    const auto bp = refine_boundary(c, {p, 0}, {p + 1, 0}, 1e-9);
    CHECK(bp.width < 1e-9);
    CHECK(bp.value_a != bp.value_b);
    CHECK(bp.v == 9.995);
    CHECK(std::fabs(bp.u - 0.876898493756) < 1e-3);
    const auto [ua, va] = c.cell_uv(p, 0);
    const auto [ub, vb] = c.cell_uv(p + 1, 0);
    CHECK(bp.u >= std::min(ua, ub));
    CHECK(bp.u <= std::max(ua, ub));
    (void)va;
    (void)vb;
}

TEST_CASE("boundary stability under doubled resolution")
{
    auto locate = [](std::uint32_t nu) {
        const auto c = polar_row(0.86, 0.89, nu);
        const auto g = run_sweep(c);
        std::uint32_t p = 0;
        while (p + 1 < c.nu && g.value(p, 0) == g.value(p + 1, 0)) ++p;
        REQUIRE(p + 1 < c.nu);
        return refine_boundary(c, {p, 0}, {p + 1, 0}, 1e-10).u;
    };
    const double coarse = locate(6);
    const double fine = locate(11);
    const double pixel = (0.89 - 0.86) / 10.0;
    CHECK(std::fabs(coarse - fine) < 2.0 * pixel);
}

TEST_CASE("refining the primary curve finds a flip of the second symbol")
{
    SweepConfig c = polar_row(0.8, 1.05, 26, 2);
    c.v_lo = 5.0;
    c.v_hi = 5.5;
    const auto g = run_sweep(c);
    std::uint32_t p = 0;
    while (p + 1 < c.nu && g.value(p, 0) == g.value(p + 1, 0)) ++p;
    REQUIRE(p + 1 < c.nu);
    const auto bp = refine_boundary(c, {p, 0}, {p + 1, 0}, 1e-9);
    const auto left = cell_symbols(c, bp.u - bp.width, bp.v);
    const auto right = cell_symbols(c, bp.u + bp.width, bp.v);
    REQUIRE(left.symbols.size() >= 2);
    REQUIRE(right.symbols.size() >= 2);
    CHECK(left.symbols[0] == right.symbols[0]);
    CHECK(left.symbols[1] != right.symbols[1]);
}

TEST_CASE("refine errors")
{
    const auto c = polar_row(0.86, 0.89, 4);
    CHECK_THROWS_WITH(refine_boundary(c, {0, 0}, {0, 1}, 1e-9), "no boundary");
    CHECK_THROWS_AS(refine_boundary(c, {0, 0}, {2, 0}, 1e-9), DomainError);
    CHECK_THROWS_AS(refine_boundary(c, {0, 0}, {9, 0}, 1e-9), DomainError);
    CHECK_THROWS_AS(refine_boundary(c, {0, 0}, {1, 0}, 0.0), DomainError);
}
