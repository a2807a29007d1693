#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homoclinic/integrate.hpp"

namespace homoclinic {

using Bits = std::vector<std::uint8_t>;

/// Parses a string of '0'/'1' characters.
Bits bits_from_string(std::string_view s);
std::string bits_to_string(std::span<const std::uint8_t> bits);

enum class EncodingMode : std::uint8_t { Full = 0, OneSided = 1, Dcp = 2 };

std::string_view encoding_mode_name(EncodingMode m);
EncodingMode parse_encoding_mode(std::string_view name);

struct KneadingConfig {
    std::size_t i = 1;  // first symbol used, 1-based
    std::size_t j = 10; // last symbol used
    double q = 0.5;
    EncodingMode mode = EncodingMode::Full;

    void validate() const;

    static KneadingConfig dcp_default() { return {601, 1000, 0.5, EncodingMode::Dcp}; }
};

struct KneadingValue {
    double value = 0.0;
    bool truncated = false;
};

/// K = sum_{n=i}^{j} kappa_n q^(j-n+1). Sequences that end inside the window are summed
/// up to their last symbol with the window exponents and flagged as truncated.
KneadingValue kneading_invariant(std::span<const std::uint8_t> seq, const KneadingConfig& cfg);

/// Number of leading ones (at most r) divided by r.
double one_sided_invariant(std::span<const std::uint8_t> seq, std::size_t r);

/// Smallest p <= n/2 with w[k] == w[k+p] for all k, if any.
std::optional<std::size_t> detect_period(std::span<const std::uint8_t> window);

/// LZ76 phrase count (Kaspar-Schuster scheme).
std::size_t lz76_complexity(std::span<const std::uint8_t> window);

double normalized_lz(std::size_t complexity, std::size_t n);

struct LongTermClass {
    enum class Kind : std::uint8_t { Periodic, Chaotic, Escaped };
    Kind kind = Kind::Chaotic;
    std::size_t period = 0;        // Periodic
    std::size_t lz_complexity = 0; // Chaotic
    double normalized = 0.0;       // Chaotic
    bool short_window = false;     // stream ended before the window start

    static LongTermClass periodic(std::size_t p) { return {Kind::Periodic, p, 0, 0.0, false}; }
    static LongTermClass escaped() { return {Kind::Escaped, 0, 0, 0.0, false}; }
};

/// Escaped streams map to Escaped. Otherwise the window [i..j] (clipped to the stream) is
/// tested for exact periodicity, and its LZ76 complexity is reported when aperiodic.
LongTermClass classify_long_term(const SymbolStream& stream, const KneadingConfig& cfg);

}  // namespace homoclinic
