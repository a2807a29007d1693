#include "homoclinic/symbolic.hpp"

#include <algorithm>
#include <cmath>

namespace homoclinic {

Bits bits_from_string(std::string_view s)
{
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '0' || c == '1') {
            out.push_back(static_cast<std::uint8_t>(c - '0'));
        } else {
            throw DomainError("invalid bit character '" + std::string(1, c) + "'");
        }
    }
    return out;
}

std::string bits_to_string(std::span<const std::uint8_t> bits)
{
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

std::string_view encoding_mode_name(EncodingMode m)
{
    switch (m) {
    case EncodingMode::Full:
        return "full";
    case EncodingMode::OneSided:
        return "one-sided";
    case EncodingMode::Dcp:
        return "dcp";
    }
    return "full";
}

EncodingMode parse_encoding_mode(std::string_view name)
{
    if (name == "full") {
        return EncodingMode::Full;
    }
    if (name == "one-sided" || name == "onesided") {
        return EncodingMode::OneSided;
    }
    if (name == "dcp") {
        return EncodingMode::Dcp;
    }
    throw DomainError("invalid mode '" + std::string(name) + "' (expected full, one-sided or dcp)");
}

void KneadingConfig::validate() const
{
    if (i < 1 || j < i) {
        throw DomainError("window must satisfy 1 <= i <= j");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("q must lie in (0, 1)");
    }
}

KneadingValue kneading_invariant(std::span<const std::uint8_t> seq, const KneadingConfig& cfg)
{
    cfg.validate();
    if (seq.size() < cfg.i) {
        throw DomainError("window starts past sequence end");
    }
    KneadingValue out;
    out.truncated = seq.size() < cfg.j;
    const std::size_t last = std::min(cfg.j, seq.size());

    // Walk from the most significant (last) symbol down; weights q, q^2, ...
    double w = 1.0;
    double sum = 0.0;
    for (std::size_t n = cfg.j; n >= cfg.i; --n) {
        w *= cfg.q;
        if (n <= last && seq[n - 1]) {
            sum += w;
        }
        if (n == cfg.i) {
            break;
        }
    }
    out.value = sum;
    return out;
}

double one_sided_invariant(std::span<const std::uint8_t> seq, std::size_t r)
{
    if (seq.empty()) {
        throw DomainError("empty symbol sequence");
    }
    if (r < 1) {
        throw DomainError("r must be positive");
    }
    std::size_t n = 0;
    while (n < r && n < seq.size() && seq[n] == 1) {
        ++n;
    }
    return static_cast<double>(n) / static_cast<double>(r);
}

std::optional<std::size_t> detect_period(std::span<const std::uint8_t> window)
{
    const std::size_t n = window.size();
    for (std::size_t p = 1; p <= n / 2; ++p) {
        bool ok = true;
        for (std::size_t k = 0; k + p < n; ++k) {
            if (window[k] != window[k + p]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return p;
        }
    }
    return std::nullopt;
}

std::size_t lz76_complexity(std::span<const std::uint8_t> s)
{
    const std::size_t n = s.size();
    if (n == 0) {
        throw DomainError("LZ76 complexity of an empty window");
    }
    if (n == 1) {
        return 1;
    }
    std::size_t c = 1;
    std::size_t l = 1;
    std::size_t i = 0;
    std::size_t k = 1;
    std::size_t kmax = 1;
    while (true) {
        if (s[i + k - 1] == s[l + k - 1]) {
            ++k;
            if (l + k > n) {
                ++c;
                break;
            }
        } else {
            kmax = std::max(k, kmax);
            ++i;
            if (i == l) {
                ++c;
                l += kmax;
                if (l + 1 > n) {
                    break;
                }
                i = 0;
                k = 1;
                kmax = 1;
            } else {
                k = 1;
            }
        }
    }
    return c;
}

double normalized_lz(std::size_t complexity, std::size_t n)
{
    if (n < 2) {
        return 0.0;
    }
    const double dn = static_cast<double>(n);
    return static_cast<double>(complexity) * std::log2(dn) / dn;
}

LongTermClass classify_long_term(const SymbolStream& stream, const KneadingConfig& cfg)
{
    cfg.validate();
    if (stream.status == StreamStatus::Escaped) {
        return LongTermClass::escaped();
    }
    const auto& sym = stream.symbols;
    LongTermClass out;
    if (sym.size() < cfg.i) {
        out.kind = LongTermClass::Kind::Chaotic;
        out.short_window = true;
        if (!sym.empty()) {
            out.lz_complexity = lz76_complexity(sym);
            out.normalized = normalized_lz(out.lz_complexity, sym.size());
        }
        return out;
    }
    const std::size_t last = std::min(cfg.j, sym.size());
    std::span<const std::uint8_t> w(sym.data() + (cfg.i - 1), last - cfg.i + 1);
    if (w.size() >= 2) {
        if (auto p = detect_period(w)) {
            return LongTermClass::periodic(*p);
        }
    }
    out.kind = LongTermClass::Kind::Chaotic;
    out.lz_complexity = lz76_complexity(w);
    out.normalized = normalized_lz(out.lz_complexity, w.size());
    return out;
}

}  // namespace homoclinic
