#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homoclinic/sweep.hpp"

namespace homoclinic {

// Binary grid container, little-endian:
//   "CSWP" | version u16 | model u8 | transform u8 | mode u8 | branch u8 | nu u32 | nv u32
//   | u_lo u_hi v_lo v_hi f64 | i j u32 | q f64 | dt f64
//   | [model 255 only: extension length u32 + key=value text]
//   | nu*nv f64 values | nu*nv u8 classes | [mode 2 only: nu*nv u32 codes]

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kTheoryModelId = 255;
inline constexpr std::uint8_t kDiagramMode = 3;

struct GridFile {
    std::uint16_t version = kContainerVersion;
    std::uint8_t model_id = 0;
    std::uint8_t transform_id = 0;
    std::uint8_t mode = 0;
    std::uint8_t branch = 0;
    std::uint32_t nu = 0;
    std::uint32_t nv = 0;
    double u_lo = 0.0;
    double u_hi = 0.0;
    double v_lo = 0.0;
    double v_hi = 0.0;
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double q = 0.0;
    double dt = 0.0;
    std::string extension;
    std::vector<double> values;
    std::vector<std::uint8_t> classes;
    std::vector<std::uint32_t> dcp_codes;
};

std::vector<std::uint8_t> encode_grid_file(const GridFile& g);
GridFile decode_grid_file(std::span<const std::uint8_t> bytes);

GridFile to_grid_file(const SweepGrid& grid);

/// Rebuilds a sweep grid from a container. Integration settings that the container does not
/// record (offset, escape radius, horizon) are taken from `base`.
SweepGrid from_grid_file(const GridFile& g, const IntegrationConfig& base = {});

void write_grid_file(const std::filesystem::path& path, const GridFile& g);
GridFile read_grid_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void atomic_write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void atomic_write_file(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace homoclinic
