#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace testing_support {

// SplitMix64: small, fully specified generator for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }
    bool coin() { return (next() >> 63) != 0; }

private:
    std::uint64_t state_;
};

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const char* base = std::getenv("HOMOCLINIC_TEST_TMP");
    std::filesystem::path dir = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "homoclinic_tests";
    dir /= name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
