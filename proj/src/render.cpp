#include "homoclinic/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include <png.h>

#include "homoclinic/container.hpp"

namespace homoclinic {

namespace {

constexpr std::size_t kMaxPixels = std::size_t(1) << 28;

void check_dims(std::uint64_t w, std::uint64_t h)
{
    if (w == 0 || h == 0 || w * h > kMaxPixels) {
        throw DomainError("image dimensions out of range: " + std::to_string(w) + "x" + std::to_string(h));
    }
}

Rgb gray(std::uint8_t v) { return {v, v, v}; }

struct PngReadState {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

}  // namespace

Image::Image(std::uint32_t w, std::uint32_t h, Rgb fill) : width(w), height(h)
{
    check_dims(w, h);
    pixels.assign(std::size_t(w) * h, fill);
}

Colormap build_colormap(std::uint32_t seed)
{
    Colormap cm;
    cm.seed = seed;
    std::mt19937 gen(seed);
    for (int k = 0; k < 256; ++k) {
        cm.entries[k] = {static_cast<std::uint8_t>(255 - k), static_cast<std::uint8_t>(gen() >> 24),
                         static_cast<std::uint8_t>(k)};
    }
    return cm;
}

std::uint8_t kneading_bin(double k)
{
    if (!(k > 0.0)) {
        return 0;
    }
    const double b = std::floor(k * 255.999);
    return static_cast<std::uint8_t>(std::min(255.0, b));
}

std::uint8_t period_slot(std::uint32_t period)
{
    // Knuth multiplicative hash, top byte.
    return static_cast<std::uint8_t>((period * 2654435761u) >> 24);
}

std::uint8_t complexity_gray(double normalized)
{
    const double c = std::clamp(normalized, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - c)));
}

Image render_grid(const SweepGrid& grid, const Colormap& cmap, const SpecialColors& special)
{
    const SweepConfig& c = grid.config;
    const std::size_t n = std::size_t(c.nu) * c.nv;
    if (grid.values.size() != n || grid.classes.size() != n) {
        throw DomainError("grid arrays do not match the resolution");
    }
    const bool dcp = c.encoding.mode == EncodingMode::Dcp;
    if (dcp && grid.dcp_codes.size() != n) {
        throw DomainError("dcp grid without codes");
    }
    const std::size_t window = c.encoding.j - c.encoding.i + 1;

    Image img(c.nu, c.nv);
    for (std::uint32_t q = 0; q < c.nv; ++q) {
        const std::uint32_t y = c.nv - 1 - q;
        for (std::uint32_t p = 0; p < c.nu; ++p) {
            const std::size_t idx = grid.index(p, q);
            Rgb px;
            switch (static_cast<CellClass>(grid.classes[idx])) {
            case CellClass::Escaped:
                px = special.escape;
                break;
            case CellClass::TimedOut:
                px = special.timeout;
                break;
            case CellClass::Invalid:
                px = special.invalid;
                break;
            case CellClass::Unstarted:
                px = special.unstarted;
                break;
            case CellClass::Ok:
            case CellClass::Truncated:
                if (dcp) {
                    const std::uint32_t code = grid.dcp_codes[idx];
                    if (code & kPeriodicBit) {
                        px = cmap.entries[period_slot(code & ~kPeriodicBit)];
                    } else {
                        px = gray(complexity_gray(normalized_lz(code, window)));
                    }
                } else {
                    px = cmap.entries[kneading_bin(grid.values[idx])];
                }
                break;
            }
            img.at(p, y) = px;
        }
    }
    return img;
}

Image render_diagram(const theory::DiagramGrid& grid)
{
    const auto& c = grid.config;
    Image img(c.n_mu, c.n_nu);
    for (std::uint32_t q = 0; q < c.n_nu; ++q) {
        for (std::uint32_t p = 0; p < c.n_mu; ++p) {
            Rgb px{255, 255, 255};
            switch (grid.at(p, q)) {
            case theory::RegionClass::Negative:
                px = {30, 60, 200};
                break;
            case theory::RegionClass::Positive:
                px = {215, 215, 215};
                break;
            case theory::RegionClass::Infeasible:
                break;
            }
            img.at(p, c.n_nu - 1 - q) = px;
        }
    }
    return img;
}

void overlay_curves(Image& image, const PlotFrame& frame, const std::vector<CurveOverlay>& curves)
{
    if (image.width < 2 || image.height < 2) {
        return;
    }
    const double w1 = image.width - 1;
    const double h1 = image.height - 1;
    auto row_of = [&](double v) { return h1 - (v - frame.v_lo) / (frame.v_hi - frame.v_lo) * h1; };

    for (const auto& curve : curves) {
        if (curve.vertical_u) {
            const double xf = (*curve.vertical_u - frame.u_lo) / (frame.u_hi - frame.u_lo) * w1;
            const long x = std::lround(xf);
            if (x < 0 || x > static_cast<long>(w1)) {
                continue;
            }
            for (std::uint32_t y = 0; y < image.height; ++y) {
                image.at(static_cast<std::uint32_t>(x), y) = curve.color;
            }
            continue;
        }
        if (!curve.v_of_u) {
            continue;
        }
        double prev_row = 0.0;
        bool have_prev = false;
        for (std::uint32_t x = 0; x < image.width; ++x) {
            const double u = frame.u_lo + x / w1 * (frame.u_hi - frame.u_lo);
            std::optional<double> v;
            try {
                v = curve.v_of_u(u);
            } catch (const DomainError&) {
                v.reset();
            }
            if (!v || !std::isfinite(*v)) {
                have_prev = false;
                continue;
            }
            const double row = row_of(*v);
            // Join to the previous column with a vertical run unless the curve jumps (a pole).
            double r0 = row;
            double r1 = row;
            if (have_prev && std::fabs(prev_row - row) < image.height) {
                r0 = std::min(row, prev_row);
                r1 = std::max(row, prev_row);
            }
            const long y0 = std::max<long>(0, std::lround(r0));
            const long y1 = std::min<long>(static_cast<long>(h1), std::lround(r1));
            for (long y = y0; y <= y1; ++y) {
                image.at(x, static_cast<std::uint32_t>(y)) = curve.color;
            }
            prev_row = row;
            have_prev = true;
        }
    }
}

ImageFormat image_format_for(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") {
        return ImageFormat::PNG;
    }
    if (ext == ".ppm") {
        return ImageFormat::PPM;
    }
    throw DomainError("unknown image extension '" + ext + "' (expected .ppm or .png)");
}

std::vector<std::uint8_t> encode_ppm(const Image& image)
{
    check_dims(image.width, image.height);
    const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + image.pixels.size() * 3);
    for (const auto& px : image.pixels) {
        out.push_back(px.r);
        out.push_back(px.g);
        out.push_back(px.b);
    }
    return out;
}

Image decode_ppm(const std::vector<std::uint8_t>& bytes)
{
    std::size_t pos = 0;
    auto skip_space = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() {
        skip_space();
        std::uint64_t v = 0;
        std::size_t digits = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 10) {
            v = v * 10 + (bytes[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0) {
            throw IoError("malformed PPM header");
        }
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw IoError("not a binary PPM (P6) file");
    }
    pos = 2;
    const auto w = read_int();
    const auto h = read_int();
    const auto maxval = read_int();
    if (maxval != 255) {
        throw IoError("only 8-bit PPM files are supported");
    }
    ++pos;  // single whitespace before the raster
    check_dims(w, h);
    if (bytes.size() - std::min(pos, bytes.size()) < w * h * 3) {
        throw IoError("truncated PPM raster");
    }
    Image img(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h));
    for (auto& px : img.pixels) {
        px = {bytes[pos], bytes[pos + 1], bytes[pos + 2]};
        pos += 3;
    }
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& image)
{
    check_dims(image.width, image.height);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw IoError("png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
            auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            v->insert(v->end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(std::size_t(image.width) * 3);
    for (std::uint32_t y = 0; y < image.height; ++y) {
        for (std::uint32_t x = 0; x < image.width; ++x) {
            const Rgb& px = image.at(x, y);
            row[3 * x] = px.r;
            row[3 * x + 1] = px.g;
            row[3 * x + 2] = px.b;
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw IoError("not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw IoError("png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    PngReadState state{&bytes, 0};
    Image img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decoding failed");
    }
    png_set_read_fn(png, &state, [](png_structp p, png_bytep data, png_size_t len) {
        auto* s = static_cast<PngReadState*>(png_get_io_ptr(p));
        if (s->bytes->size() - s->pos < len) {
            png_error(p, "truncated PNG");
        }
        std::memcpy(data, s->bytes->data() + s->pos, len);
        s->pos += len;
    });
    png_read_info(png, info);
    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) {
        png_set_strip_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);
    img = Image(w, h);
    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            img.at(x, y) = {row[3 * x], row[3 * x + 1], row[3 * x + 2]};
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_image(const Image& image, const std::filesystem::path& path, ImageFormat format)
{
    try {
        atomic_write_file(path, format == ImageFormat::PPM ? encode_ppm(image) : encode_png(image));
    } catch (const IoError& e) {
        throw IoError("writing image " + path.string() + ": " + e.what());
    }
}

Image read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file_bytes(path)); }

Image read_png(const std::filesystem::path& path) { return decode_png(read_file_bytes(path)); }

}  // namespace homoclinic
