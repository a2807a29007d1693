#include <charconv>
#include <cstdlib>
#include <fstream>
#include <system_error>
#include <thread>

#include <fmt/format.h>

#include "homoclinic/cli.hpp"
#include "homoclinic/container.hpp"
#include "homoclinic/models.hpp"

namespace homoclinic::cli {

namespace {

double parse_double(std::string_view text, std::string_view what)
{
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw DomainError(fmt::format("invalid number '{}' in {}", text, what));
    }
    return v;
}

std::uint32_t parse_u32(std::string_view text, std::string_view what)
{
    std::uint32_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw DomainError(fmt::format("invalid integer '{}' in {}", text, what));
    }
    return v;
}

std::pair<std::string_view, std::string_view> split_colon(std::string_view text, std::string_view what)
{
    // A leading minus sign may precede the separator, so split at the first ':' after position 0.
    const auto pos = text.find(':', 1);
    if (pos == std::string_view::npos || text.find(':', pos + 1) != std::string_view::npos) {
        throw DomainError(fmt::format("expected lo:hi in {}, got '{}'", what, text));
    }
    return {text.substr(0, pos), text.substr(pos + 1)};
}

}  // namespace

std::pair<double, double> parse_range(std::string_view text)
{
    const auto [lo, hi] = split_colon(text, "range");
    return {parse_double(lo, "range"), parse_double(hi, "range")};
}

std::pair<std::uint32_t, std::uint32_t> parse_pair_u32(std::string_view text)
{
    const auto [a, b] = split_colon(text, "integer pair");
    return {parse_u32(a, "integer pair"), parse_u32(b, "integer pair")};
}

std::string canonical_config_text(const SweepConfig& cfg)
{
    const auto& in = cfg.integration;
    std::string s;
    auto put = [&s](std::string_view key, const auto& value) { s += fmt::format("{}={}\n", key, value); };
    put("model", model_name(cfg.model));
    put("transform", transform_name(cfg.transform));
    put("u_lo", cfg.u_lo);
    put("u_hi", cfg.u_hi);
    put("v_lo", cfg.v_lo);
    put("v_hi", cfg.v_hi);
    put("nu", cfg.nu);
    put("nv", cfg.nv);
    put("mode", encoding_mode_name(cfg.encoding.mode));
    put("i", cfg.encoding.i);
    put("j", cfg.encoding.j);
    put("q", cfg.encoding.q);
    put("branch", branch_name(cfg.branch));
    put("dt", in.dt);
    put("max_time", in.max_time);
    put("esc_bound", in.esc_bound);
    put("delta", in.delta);
    put("threshold", in.symbol_threshold);
    put("refine_extrema", in.refine_extrema ? 1 : 0);
    put("settle_tol", in.settle_tol);
    put("format_version", kContainerVersion);
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    return fmt::format("{:016x}", v);
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg)
{
    const auto& in = cfg.integration;
    return nlohmann::json{
        {"model", std::string(model_name(cfg.model))},
        {"transform", std::string(transform_name(cfg.transform))},
        {"u_range", {cfg.u_lo, cfg.u_hi}},
        {"v_range", {cfg.v_lo, cfg.v_hi}},
        {"res", {cfg.nu, cfg.nv}},
        {"mode", std::string(encoding_mode_name(cfg.encoding.mode))},
        {"window", {cfg.encoding.i, cfg.encoding.j}},
        {"q", cfg.encoding.q},
        {"branch", std::string(branch_name(cfg.branch))},
        {"dt", in.dt},
        {"max_time", in.max_time},
        {"esc_bound", in.esc_bound},
        {"delta", in.delta},
        {"threshold", in.symbol_threshold},
        {"refine_extrema", in.refine_extrema},
        {"settle_tol", in.settle_tol},
    };
}

SweepConfig sweep_config_from_json(const nlohmann::json& j)
{
    try {
        SweepConfig cfg;
        cfg.model = parse_model(j.at("model").get<std::string>());
        cfg.transform = parse_transform(j.at("transform").get<std::string>());
        cfg.u_lo = j.at("u_range").at(0).get<double>();
        cfg.u_hi = j.at("u_range").at(1).get<double>();
        cfg.v_lo = j.at("v_range").at(0).get<double>();
        cfg.v_hi = j.at("v_range").at(1).get<double>();
        cfg.nu = j.at("res").at(0).get<std::uint32_t>();
        cfg.nv = j.at("res").at(1).get<std::uint32_t>();
        cfg.encoding.mode = parse_encoding_mode(j.at("mode").get<std::string>());
        cfg.encoding.i = j.at("window").at(0).get<std::size_t>();
        cfg.encoding.j = j.at("window").at(1).get<std::size_t>();
        cfg.encoding.q = j.at("q").get<double>();
        cfg.branch = parse_branch(j.at("branch").get<std::string>());
        auto& in = cfg.integration;
        in.dt = j.at("dt").get<double>();
        in.max_time = j.at("max_time").get<double>();
        in.esc_bound = j.at("esc_bound").get<double>();
        in.delta = j.at("delta").get<double>();
        in.symbol_threshold = j.at("threshold").get<double>();
        in.refine_extrema = j.at("refine_extrema").get<bool>();
        in.settle_tol = j.at("settle_tol").get<double>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed sweep configuration: ") + e.what());
    }
}

nlohmann::json manifest_to_json(const RunManifest& m)
{
    return nlohmann::json{
        {"config_hash", hex64(m.config_hash)},
        {"tool_version", m.tool_version},
        {"wall_time", m.wall_time},
        {"worker_count", m.worker_count},
        {"config", m.config},
    };
}

RunManifest manifest_from_json(const nlohmann::json& j)
{
    try {
        RunManifest m;
        const auto hash = j.at("config_hash").get<std::string>();
        const auto res = std::from_chars(hash.data(), hash.data() + hash.size(), m.config_hash, 16);
        if (hash.size() != 16 || res.ec != std::errc{} || res.ptr != hash.data() + hash.size()) {
            throw DomainError("malformed manifest: bad config_hash");
        }
        m.tool_version = j.at("tool_version").get<std::string>();
        m.wall_time = j.at("wall_time").get<double>();
        m.worker_count = j.at("worker_count").get<unsigned>();
        if (m.worker_count == 0) throw DomainError("malformed manifest: worker_count must be positive");
        m.config = j.value("config", nlohmann::json::object());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed manifest: ") + e.what());
    }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact)
{
    auto p = artifact;
    p += ".manifest.json";
    return p;
}

void write_manifest(const std::filesystem::path& artifact, const RunManifest& m)
{
    atomic_write_file(manifest_path_for(artifact), manifest_to_json(m).dump(2) + "\n");
}

std::optional<RunManifest> read_manifest(const std::filesystem::path& artifact)
{
    const auto path = manifest_path_for(artifact);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("malformed manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

unsigned resolve_workers(std::optional<unsigned> flag)
{
    if (flag) {
        if (*flag == 0) throw DomainError("--workers must be positive");
        return *flag;
    }
    if (const char* env = std::getenv("CHAOS_WORKERS"); env != nullptr && *env != '\0') {
        const std::string_view text(env);
        const auto n = parse_u32(text, "CHAOS_WORKERS");
        if (n == 0) throw DomainError("CHAOS_WORKERS must be positive");
        return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

nlohmann::json models_info_json(ModelKind kind, double a, double b)
{
    const ModelSpec m{kind, a, b};
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("parameters must be finite");
    constexpr double kFlagTol = 1e-8;
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& p : equilibria(m)) {
        const auto rep = classify_equilibrium(m, p);
        nlohmann::json e;
        e["location"] = {p[0], p[1], p[2]};
        nlohmann::json evs = nlohmann::json::array();
        for (const auto& ev : rep.eigenvalues) evs.push_back({ev.real(), ev.imag()});
        e["eigenvalues"] = evs;
        e["class"] = std::string(topo_class_name(rep.topo_class));
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        e["lambda"] = opt(rep.lambda);
        e["rho"] = opt(rep.rho);
        e["omega"] = opt(rep.omega);
        e["nu"] = opt(rep.nu);
        e["sigma1"] = opt(rep.sigma1);
        e["sigma2"] = opt(rep.sigma2);
        nlohmann::json flags = nlohmann::json::array();
        if (rep.sigma1 && std::fabs(*rep.sigma1) < kFlagTol) flags.push_back("NSF");
        if (rep.sigma2 && std::fabs(*rep.sigma2) < kFlagTol) flags.push_back("NDSF");
        e["flags"] = flags;
        eqs.push_back(e);
    }
    return nlohmann::json{{"model", std::string(model_name(kind))}, {"a", a}, {"b", b}, {"equilibria", eqs}};
}

}  // namespace homoclinic::cli
