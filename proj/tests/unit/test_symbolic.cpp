#include <cmath>
#include <string>

#include "doctest.h"
#include "support.hpp"

#include "homoclinic/symbolic.hpp"

using namespace homoclinic;
using testing_support::Rng;

namespace {

KneadingConfig window(std::size_t i, std::size_t j, double q = 0.5)
{
    KneadingConfig c;
    c.i = i;
    c.j = j;
    c.q = q;
    return c;
}

// Exhaustive-history LZ76 parse written from the definition: a phrase grows while it can be
// copied from a start position strictly inside the text preceding its last symbol.
std::size_t lz76_oracle(const Bits& s)
{
    const std::string t = bits_to_string(s);
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < t.size()) {
        std::size_t len = 1;
        while (pos + len <= t.size()) {
            const std::string phrase = t.substr(pos, len);
            const std::string history = t.substr(0, pos + len - 1);
            if (history.find(phrase) == std::string::npos) break;
            ++len;
        }
        ++count;
        pos += len;
    }
    return count;
}

bool is_periodic(const Bits& w, std::size_t p)
{
    for (std::size_t k = 0; k + p < w.size(); ++k) {
        if (w[k] != w[k + p]) return false;
    }
    return true;
}

Bits random_bits(Rng& rng, std::size_t n)
{
    Bits b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.next() & 1u);
    return b;
}

}  // namespace

TEST_CASE("bit strings")
{
    CHECK(bits_from_string("1011") == Bits{1, 0, 1, 1});
    CHECK(bits_to_string(Bits{0, 1, 1}) == "011");
    CHECK_THROWS_AS(bits_from_string("10a1"), DomainError);
}

TEST_CASE("kneading invariant: direct evaluation")
{
    CHECK(kneading_invariant(bits_from_string("101"), window(1, 3)).value == doctest::Approx(0.625));
    CHECK(kneading_invariant(Bits(20, 0), window(1, 20)).value == 0.0);
    CHECK(kneading_invariant(Bits(20, 1), window(1, 20)).value == 1.0 - std::ldexp(1.0, -20));
    const Bits s = bits_from_string("0110100");
    for (std::size_t i = 1; i <= s.size(); ++i) {
        CHECK(kneading_invariant(s, window(i, i)).value == 0.5 * s[i - 1]);
        CHECK(kneading_invariant(s, window(i, i, 0.3)).value == doctest::Approx(0.3 * s[i - 1]));
    }
    const auto k = kneading_invariant(bits_from_string("11011"), window(2, 4));
    CHECK(k.value == doctest::Approx(1 * 0.125 + 0 * 0.25 + 1 * 0.5));
    CHECK_FALSE(k.truncated);
}

TEST_CASE("kneading invariant: short sequences are truncated or rejected")
{
    const auto k = kneading_invariant(bits_from_string("11"), window(1, 4));
    CHECK(k.truncated);
    CHECK(k.value == doctest::Approx(1.0 / 16 + 1.0 / 8));
    CHECK_THROWS_WITH(kneading_invariant(bits_from_string("11"), window(3, 4)), "window starts past sequence end");
}

TEST_CASE("property: K orders windows like binary fractions read from the window end")
{
    const std::size_t n = 10;
    for (std::uint32_t w = 0; w < (1u << n); ++w) {
        Bits b(n);
        std::uint32_t reversed = 0;
        for (std::size_t k = 0; k < n; ++k) {
            b[k] = static_cast<std::uint8_t>((w >> k) & 1u);
            reversed |= b[k] << k; // b[j-1] is the most significant digit
        }
        const double k_value = kneading_invariant(b, window(1, n)).value;
        REQUIRE(k_value == std::ldexp(double(reversed), -int(n)));
    }
}

TEST_CASE("property: K is strictly monotone in the reversed lexicographic order")
{
    Rng rng(21);
    for (int t = 0; t < 2000; ++t) {
        const Bits a = random_bits(rng, 10);
        const Bits b = random_bits(rng, 10);
        const std::string sa = bits_to_string(a);
        const std::string sb = bits_to_string(b);
        const std::string ra(sa.rbegin(), sa.rend());
        const std::string rb(sb.rbegin(), sb.rend());
        const double ka = kneading_invariant(a, window(1, 10)).value;
        const double kb = kneading_invariant(b, window(1, 10)).value;
        if (ra < rb) REQUIRE(ka < kb);
        if (ra == rb) REQUIRE(ka == kb);
    }
}

TEST_CASE("one-sided invariant")
{
    CHECK(one_sided_invariant(bits_from_string("11101111"), 10) == doctest::Approx(0.3));
    CHECK(one_sided_invariant(bits_from_string("0111"), 3) == 0.0);
    CHECK(one_sided_invariant(Bits(7, 1), 7) == 1.0);
    CHECK(one_sided_invariant(Bits(9, 1), 7) == 1.0);
    CHECK_THROWS_AS(one_sided_invariant(Bits{}, 3), DomainError);
}

TEST_CASE("property: one-sided invariant times r is an integer in [0, r]")
{
    Rng rng(22);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t r = 1 + rng.below(30);
        Bits s = random_bits(rng, 1 + rng.below(40));
        s[0] = 1;
        const double v = one_sided_invariant(s, r) * double(r);
        REQUIRE(v == std::round(v));
        REQUIRE(v >= 0.0);
        REQUIRE(v <= double(r));
    }
}

TEST_CASE("period detection examples")
{
    Bits alt(400);
    for (std::size_t k = 0; k < alt.size(); ++k) alt[k] = static_cast<std::uint8_t>((k + 1) % 2);
    CHECK(detect_period(alt) == std::optional<std::size_t>(2));
    CHECK(detect_period(Bits(50, 1)) == std::optional<std::size_t>(1));
    CHECK_FALSE(detect_period(bits_from_string("1101001000")).has_value());
}

TEST_CASE("property: detect_period agrees with brute force on every window up to length 16")
{
    for (std::size_t n = 2; n <= 16; ++n) {
        for (std::uint32_t w = 0; w < (1u << n); ++w) {
            Bits b(n);
            for (std::size_t k = 0; k < n; ++k) b[k] = static_cast<std::uint8_t>((w >> k) & 1u);
            std::optional<std::size_t> expected;
            for (std::size_t p = 1; p <= n / 2; ++p) {
                if (is_periodic(b, p)) {
                    expected = p;
                    break;
                }
            }
            REQUIRE(detect_period(b) == expected);
        }
    }
}

TEST_CASE("LZ76 phrase counts")
{
    CHECK(lz76_complexity(Bits(100, 0)) == 2);
    // Hand parse: 0 | 001 | 10 | 100 | 1000 | 101
    CHECK(lz76_complexity(bits_from_string("0001101001000101")) == 6);
    CHECK(lz76_oracle(bits_from_string("0001101001000101")) == 6);
    CHECK(lz76_complexity(Bits{1}) == 1);
    CHECK_THROWS_AS(lz76_complexity(Bits{}), DomainError);
}

TEST_CASE("property: LZ76 agrees with the definition-level oracle")
{
    Rng rng(23);
    for (int t = 0; t < 300; ++t) {
        const Bits b = random_bits(rng, 1 + rng.below(120));
        REQUIRE(lz76_complexity(b) == lz76_oracle(b));
    }
}

TEST_CASE("property: LZ76 is invariant under complement")
{
    Rng rng(24);
    for (int t = 0; t < 300; ++t) {
        Bits b = random_bits(rng, 1 + rng.below(500));
        const auto c = lz76_complexity(b);
        for (auto& x : b) x ^= 1u;
        REQUIRE(lz76_complexity(b) == c);
    }
}

TEST_CASE("property: LZ76 of periodic windows is bounded by 2p + 2")
{
    Rng rng(25);
    for (int t = 0; t < 200; ++t) {
        const std::size_t p = 1 + rng.below(8);
        const Bits block = random_bits(rng, p);
        Bits w(1000);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = block[k % p];
        REQUIRE(lz76_complexity(w) <= 2 * p + 2);
    }
}

TEST_CASE("normalized LZ")
{
    CHECK(normalized_lz(10, 1024) == doctest::Approx(10.0 * 10.0 / 1024.0));
    Rng rng(26);
    const Bits b = random_bits(rng, 4000);
    const double v = normalized_lz(lz76_complexity(b), b.size());
    CHECK(v > 0.8);
    CHECK(v < 1.2);
}

TEST_CASE("long-term classification")
{
    KneadingConfig cfg = window(5, 24);
    cfg.mode = EncodingMode::Dcp;

    SymbolStream escaped;
    escaped.symbols = Bits(30, 1);
    escaped.status = StreamStatus::Escaped;
    CHECK(classify_long_term(escaped, cfg).kind == LongTermClass::Kind::Escaped);

    SymbolStream periodic;
    for (int k = 0; k < 30; ++k) periodic.symbols.push_back(static_cast<std::uint8_t>(k % 3 == 0));
    const auto p = classify_long_term(periodic, cfg);
    CHECK(p.kind == LongTermClass::Kind::Periodic);
    CHECK(p.period == 3);

    SymbolStream chaotic;
    chaotic.symbols = bits_from_string("110100100011110101100010011101");
    const auto c = classify_long_term(chaotic, cfg);
    CHECK(c.kind == LongTermClass::Kind::Chaotic);
    const Bits w(chaotic.symbols.begin() + 4, chaotic.symbols.begin() + 24);
    CHECK(c.lz_complexity == lz76_complexity(w));
    CHECK(c.normalized == doctest::Approx(normalized_lz(c.lz_complexity, 20)));
    CHECK_FALSE(c.short_window);

    SymbolStream short_stream;
    short_stream.symbols = Bits{1, 0, 1};
    short_stream.status = StreamStatus::TimedOut;
    const auto s = classify_long_term(short_stream, cfg);
    CHECK(s.kind == LongTermClass::Kind::Chaotic);
    CHECK(s.short_window);
}

TEST_CASE("kneading config validation")
{
    CHECK_NOTHROW(window(1, 10).validate());
    CHECK_THROWS_AS(window(0, 10).validate(), DomainError);
    CHECK_THROWS_AS(window(5, 4).validate(), DomainError);
    CHECK_THROWS_AS(window(1, 4, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(window(1, 4, 0.0).validate(), DomainError);
    const auto d = KneadingConfig::dcp_default();
    CHECK(d.i == 601);
    CHECK(d.j == 1000);
    CHECK(parse_encoding_mode("one-sided") == EncodingMode::OneSided);
    CHECK(parse_encoding_mode("dcp") == EncodingMode::Dcp);
    CHECK_THROWS_AS(parse_encoding_mode("two-sided"), DomainError);
}
