#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "homoclinic/sweep.hpp"
#include "homoclinic/theory.hpp"

namespace homoclinic {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

// 256 bins: red falls 255 -> 0, blue rises 0 -> 255, green is the top byte of successive
// std::mt19937(seed) outputs.
struct Colormap {
    std::array<Rgb, 256> entries{};
    std::uint32_t seed = 42;
};

Colormap build_colormap(std::uint32_t seed = 42);

struct SpecialColors {
    Rgb escape{139, 0, 0};
    Rgb timeout{0, 0, 0};
    Rgb invalid{128, 128, 128};
    Rgb unstarted{255, 255, 255};
};

/// Pixels stored row-major from the top row down.
struct Image {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(std::uint32_t w, std::uint32_t h, Rgb fill = {});
    Rgb& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t(y) * width + x]; }
    const Rgb& at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t(y) * width + x]; }
    bool operator==(const Image&) const = default;
};

/// Colormap bin of a kneading value: floor(K * 255.999), clamped to [0, 255].
std::uint8_t kneading_bin(double k);

/// Palette slot assigned to a period.
std::uint8_t period_slot(std::uint32_t period);

/// Gray level for a normalized LZ complexity (white at 0, black at 1 and above).
std::uint8_t complexity_gray(double normalized);

/// One pixel per cell; the bottom image row is v = v_lo.
Image render_grid(const SweepGrid& grid, const Colormap& cmap, const SpecialColors& special = {});

/// Region map of a return-map diagram; the bottom image row is the lowest nu0.
Image render_diagram(const theory::DiagramGrid& grid);

struct PlotFrame {
    double u_lo = 0.0;
    double u_hi = 1.0;
    double v_lo = 0.0;
    double v_hi = 1.0;
};

struct CurveOverlay {
    // v as a function of u; empty optional where the curve is undefined.
    std::function<std::optional<double>(double)> v_of_u;
    // Set for curves that are vertical lines u = const (v_of_u is ignored).
    std::optional<double> vertical_u;
    Rgb color{255, 255, 255};
};

/// Rasterizes curves with 1-pixel strokes, clipping everything outside the frame.
void overlay_curves(Image& image, const PlotFrame& frame, const std::vector<CurveOverlay>& curves);

enum class ImageFormat : std::uint8_t { PPM, PNG };

ImageFormat image_format_for(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

void write_image(const Image& image, const std::filesystem::path& path, ImageFormat format);
Image read_ppm(const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

}  // namespace homoclinic
