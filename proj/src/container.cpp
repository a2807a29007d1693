#include "homoclinic/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <unistd.h>

namespace homoclinic {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void put(std::uint64_t v, int n)
    {
        for (int k = 0; k < n; ++k) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
        }
    }
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string raw(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == b_.size(); }

private:
    void need(std::size_t n) const
    {
        if (b_.size() - pos_ < n) {
            throw IoError("truncated grid container");
        }
    }
    std::uint64_t get(int n)
    {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int k = 0; k < n; ++k) {
            v |= std::uint64_t(b_[pos_ + k]) << (8 * k);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_grid_file(const GridFile& g)
{
    const std::size_t n = std::size_t(g.nu) * g.nv;
    if (g.values.size() != n || g.classes.size() != n) {
        throw DomainError("grid arrays do not match the resolution");
    }
    const bool dcp = g.mode == static_cast<std::uint8_t>(EncodingMode::Dcp);
    if (dcp && g.dcp_codes.size() != n) {
        throw DomainError("dcp grid without period/complexity codes");
    }
    Writer w;
    w.raw("CSWP");
    w.u16(g.version);
    w.u8(g.model_id);
    w.u8(g.transform_id);
    w.u8(g.mode);
    w.u8(g.branch);
    w.u32(g.nu);
    w.u32(g.nv);
    w.f64(g.u_lo);
    w.f64(g.u_hi);
    w.f64(g.v_lo);
    w.f64(g.v_hi);
    w.u32(g.i);
    w.u32(g.j);
    w.f64(g.q);
    w.f64(g.dt);
    if (g.model_id == kTheoryModelId) {
        w.u32(static_cast<std::uint32_t>(g.extension.size()));
        w.raw(g.extension);
    }
    for (double v : g.values) {
        w.f64(v);
    }
    for (auto c : g.classes) {
        w.u8(c);
    }
    if (dcp) {
        for (auto c : g.dcp_codes) {
            w.u32(c);
        }
    }
    return w.take();
}

GridFile decode_grid_file(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (r.raw(4) != "CSWP") {
        throw IoError("not a grid container (bad magic)");
    }
    GridFile g;
    g.version = r.u16();
    if (g.version != kContainerVersion) {
        throw IoError("unsupported grid container version " + std::to_string(g.version));
    }
    g.model_id = r.u8();
    g.transform_id = r.u8();
    g.mode = r.u8();
    g.branch = r.u8();
    g.nu = r.u32();
    g.nv = r.u32();
    g.u_lo = r.f64();
    g.u_hi = r.f64();
    g.v_lo = r.f64();
    g.v_hi = r.f64();
    g.i = r.u32();
    g.j = r.u32();
    g.q = r.f64();
    g.dt = r.f64();
    if (g.model_id == kTheoryModelId) {
        g.extension = r.raw(r.u32());
    }
    const std::size_t n = std::size_t(g.nu) * g.nv;
    if (n > bytes.size()) {
        throw IoError("truncated grid container");
    }
    g.values.resize(n);
    for (auto& v : g.values) {
        v = r.f64();
    }
    g.classes.resize(n);
    for (auto& c : g.classes) {
        c = r.u8();
    }
    if (g.mode == static_cast<std::uint8_t>(EncodingMode::Dcp)) {
        g.dcp_codes.resize(n);
        for (auto& c : g.dcp_codes) {
            c = r.u32();
        }
    }
    if (!r.done()) {
        throw IoError("trailing bytes after grid container");
    }
    return g;
}

GridFile to_grid_file(const SweepGrid& grid)
{
    const SweepConfig& c = grid.config;
    GridFile g;
    g.model_id = static_cast<std::uint8_t>(c.model);
    g.transform_id = static_cast<std::uint8_t>(c.transform);
    g.mode = static_cast<std::uint8_t>(c.encoding.mode);
    g.branch = static_cast<std::uint8_t>(c.branch);
    g.nu = c.nu;
    g.nv = c.nv;
    g.u_lo = c.u_lo;
    g.u_hi = c.u_hi;
    g.v_lo = c.v_lo;
    g.v_hi = c.v_hi;
    g.i = static_cast<std::uint32_t>(c.encoding.i);
    g.j = static_cast<std::uint32_t>(c.encoding.j);
    g.q = c.encoding.q;
    g.dt = c.integration.dt;
    g.values = grid.values;
    g.classes = grid.classes;
    g.dcp_codes = grid.dcp_codes;
    return g;
}

SweepGrid from_grid_file(const GridFile& g, const IntegrationConfig& base)
{
    if (g.model_id > static_cast<std::uint8_t>(ModelKind::AcstCubic)) {
        throw DomainError("container does not hold a model sweep");
    }
    if (g.transform_id > static_cast<std::uint8_t>(Transform::AcstAffine) ||
        g.mode > static_cast<std::uint8_t>(EncodingMode::Dcp) || g.branch > 1) {
        throw IoError("container header has out-of-range enumerations");
    }
    SweepGrid grid;
    SweepConfig& c = grid.config;
    c.model = static_cast<ModelKind>(g.model_id);
    c.transform = static_cast<Transform>(g.transform_id);
    c.encoding.mode = static_cast<EncodingMode>(g.mode);
    c.branch = static_cast<Branch>(g.branch);
    c.nu = g.nu;
    c.nv = g.nv;
    c.u_lo = g.u_lo;
    c.u_hi = g.u_hi;
    c.v_lo = g.v_lo;
    c.v_hi = g.v_hi;
    c.encoding.i = g.i;
    c.encoding.j = g.j;
    c.encoding.q = g.q;
    c.integration = base;
    c.integration.dt = g.dt;
    grid.values = g.values;
    grid.classes = g.classes;
    grid.dcp_codes = g.dcp_codes;
    return grid;
}

void atomic_write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

void atomic_write_file(const std::filesystem::path& path, std::string_view text)
{
    atomic_write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                          text.size()));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_grid_file(const std::filesystem::path& path, const GridFile& g)
{
    atomic_write_file(path, encode_grid_file(g));
}

GridFile read_grid_file(const std::filesystem::path& path)
{
    const auto bytes = read_file_bytes(path);
    try {
        return decode_grid_file(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace homoclinic
