#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "homoclinic/cli.hpp"
#include "homoclinic/container.hpp"
#include "homoclinic/models.hpp"
#include "homoclinic/render.hpp"
#include "homoclinic/theory.hpp"

namespace homoclinic::cli {

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_writable_target(const fs::path& path)
{
    const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
}

// ---------------------------------------------------------------- models-info

struct ModelsInfoArgs {
    std::string model = "chua";
    double a = 0.0;
    double b = 0.0;
    bool json = false;
};

std::string fmt_opt(const nlohmann::json& v)
{
    return v.is_null() ? std::string("-") : fmt::format("{:.10g}", v.get<double>());
}

int cmd_models_info(const ModelsInfoArgs& args, std::ostream& out)
{
    const auto report = models_info_json(parse_model(args.model), args.a, args.b);
    if (args.json) {
        out << report.dump(2) << "\n";
        return kOk;
    }
    out << fmt::format("model {}  a = {:.10g}  b = {:.10g}\n", args.model, args.a, args.b);
    int k = 0;
    for (const auto& e : report.at("equilibria")) {
        const auto& loc = e.at("location");
        out << fmt::format("equilibrium {}: ({:.10g}, {:.10g}, {:.10g})  {}\n", k++, loc[0].get<double>(),
                           loc[1].get<double>(), loc[2].get<double>(), e.at("class").get<std::string>());
        for (const auto& ev : e.at("eigenvalues")) {
            out << fmt::format("  eigenvalue {:+.10g} {:+.10g}i\n", ev[0].get<double>(), ev[1].get<double>());
        }
        out << fmt::format("  nu = {}  sigma1 = {}  sigma2 = {}", fmt_opt(e.at("nu")), fmt_opt(e.at("sigma1")),
                           fmt_opt(e.at("sigma2")));
        for (const auto& f : e.at("flags")) out << "  [" << f.get<std::string>() << "]";
        out << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string model = "chua";
    std::string transform = "identity";
    std::string u_range;
    std::string v_range;
    std::string res = "200:200";
    std::string window = "1:10";
    std::string mode = "full";
    std::string branch = "gamma1";
    double q = 0.5;
    double dt = 0.002;
    double max_time = 1e5;
    double esc_bound = 100.0;
    double delta = 1e-6;
    double threshold = 1.0;
    double settle_tol = 1e-10;
    bool no_refine_extrema = false;
    std::string out;
    std::string img;
    std::uint32_t seed = 42;
    std::optional<unsigned> workers;
    bool overlay = false;
};

SweepConfig build_sweep_config(const SweepArgs& a)
{
    SweepConfig cfg;
    cfg.model = parse_model(a.model);
    cfg.transform = parse_transform(a.transform);
    if (cfg.transform == Transform::ChuaPolar && cfg.model != ModelKind::ChuaCubic) {
        throw DomainError("the polar transform applies to the chua model only");
    }
    if (cfg.transform == Transform::AcstAffine && cfg.model != ModelKind::AcstCubic) {
        throw DomainError("the affine transform applies to the acst model only");
    }
    std::tie(cfg.u_lo, cfg.u_hi) = parse_range(a.u_range);
    std::tie(cfg.v_lo, cfg.v_hi) = parse_range(a.v_range);
    std::tie(cfg.nu, cfg.nv) = parse_pair_u32(a.res);
    const auto [i, j] = parse_pair_u32(a.window);
    cfg.encoding.i = i;
    cfg.encoding.j = j;
    cfg.encoding.q = a.q;
    cfg.encoding.mode = parse_encoding_mode(a.mode);
    cfg.branch = parse_branch(a.branch);
    auto& in = cfg.integration;
    in.dt = a.dt;
    in.max_time = a.max_time;
    in.esc_bound = a.esc_bound;
    in.delta = a.delta;
    in.symbol_threshold = a.threshold;
    in.settle_tol = a.settle_tol;
    in.refine_extrema = !a.no_refine_extrema;
    cfg.validate();
    return cfg;
}

std::vector<CurveOverlay> chua_overlays(const SweepConfig& cfg)
{
    std::vector<CurveOverlay> curves;
    CurveOverlay nsf;
    nsf.v_of_u = [](double a) -> std::optional<double> {
        try {
            return std::get<double>(analytic_curve(ModelKind::ChuaCubic, {CurveKind::NSF, 0.0}, a));
        } catch (const DomainError&) {
            return std::nullopt;
        }
    };
    nsf.color = {255, 255, 0};
    curves.push_back(nsf);

    CurveOverlay ndsf;
    ndsf.vertical_u = 6.0;
    ndsf.color = {0, 255, 0};
    curves.push_back(ndsf);

    CurveOverlay ssf;
    const double b_lo = std::max(cfg.v_lo, 1e-9);
    const double b_hi = cfg.v_hi;
    ssf.v_of_u = [b_lo, b_hi](double a) -> std::optional<double> {
        if (!(a > 0.0) || !(b_hi > b_lo)) return std::nullopt;
        return saddle_focus_transition(ModelSpec{ModelKind::ChuaCubic, a, 1.0}, a, b_lo, b_hi);
    };
    ssf.color = {255, 0, 255};
    curves.push_back(ssf);
    return curves;
}

void write_image_with_metadata(const Image& image, const fs::path& path, const RunManifest& manifest,
                               std::uint32_t seed, const std::string& window_text)
{
    write_image(image, path, image_format_for(path));
    fs::path meta = path;
    meta += ".meta.txt";
    atomic_write_file(meta, fmt::format("config_hash={}\nseed={}\nwindow={}\nwidth={}\nheight={}\n",
                                        hex64(manifest.config_hash), seed, window_text, image.width, image.height));
    write_manifest(path, manifest);
}

int cmd_sweep(const SweepArgs& args, std::ostream& out)
{
    const SweepConfig cfg = build_sweep_config(args);
    if (args.out.empty()) throw DomainError("--out is required");
    const fs::path data_path(args.out);
    require_writable_target(data_path);
    std::optional<fs::path> img_path;
    if (!args.img.empty()) {
        img_path = fs::path(args.img);
        require_writable_target(*img_path);
        image_format_for(*img_path);
    }
    if (args.overlay && (cfg.model != ModelKind::ChuaCubic || cfg.transform != Transform::Identity)) {
        throw DomainError("--overlay needs the chua model with the identity transform");
    }
    const unsigned workers = resolve_workers(args.workers);

    const auto t0 = std::chrono::steady_clock::now();
    RunOptions opts;
    opts.workers = workers;
    const SweepGrid grid = run_sweep(cfg, opts);
    const double wall = seconds_since(t0);

    RunManifest manifest;
    manifest.config_hash = fnv1a64(canonical_config_text(cfg));
    manifest.wall_time = wall;
    manifest.worker_count = workers;
    manifest.config = sweep_config_to_json(cfg);

    write_grid_file(data_path, to_grid_file(grid));
    write_manifest(data_path, manifest);

    if (img_path) {
        Image image = render_grid(grid, build_colormap(args.seed));
        if (args.overlay) {
            overlay_curves(image, PlotFrame{cfg.u_lo, cfg.u_hi, cfg.v_lo, cfg.v_hi}, chua_overlays(cfg));
        }
        const auto window = fmt::format("u={}:{} v={}:{} symbols={}:{}", cfg.u_lo, cfg.u_hi, cfg.v_lo, cfg.v_hi,
                                        cfg.encoding.i, cfg.encoding.j);
        write_image_with_metadata(image, *img_path, manifest, args.seed, window);
    }

    std::array<std::size_t, 6> counts{};
    for (auto c : grid.classes) ++counts[std::min<std::size_t>(c, 5)];
    out << fmt::format("config_hash {}\n", hex64(manifest.config_hash));
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] != 0) out << fmt::format("{:>10} {}\n", cell_class_name(static_cast<CellClass>(c)), counts[c]);
    }
    out << fmt::format("wall_time {:.3f} s on {} worker(s)\n", wall, workers);
    return kOk;
}

// ---------------------------------------------------------------- theory

struct TheoryCommon {
    std::string code = "11";
    double B0 = 0.8;
    double R = 1.0;
    double Omega0 = 3.0;
    double nu0 = 0.5;
    double phi2 = 0.0;
    std::string f0_signs = "alternating";
    bool drop_mu = false;
};

theory::ReturnMapParams common_params(const TheoryCommon& c)
{
    theory::ReturnMapParams p;
    p.B0 = c.B0;
    p.R = c.R;
    p.Omega0 = c.Omega0;
    p.nu0 = c.nu0;
    p.phi2 = c.phi2;
    p.validate();
    return p;
}

theory::IterateOptions common_iterate(const TheoryCommon& c)
{
    theory::IterateOptions opt;
    if (c.f0_signs == "alternating") {
        opt.f0_signs = theory::F0Signs::Alternating;
    } else if (c.f0_signs == "minus") {
        opt.f0_signs = theory::F0Signs::AllMinus;
    } else if (c.f0_signs == "plus") {
        opt.f0_signs = theory::F0Signs::AllPlus;
    } else {
        throw DomainError("unknown f0 sign pattern: " + c.f0_signs);
    }
    opt.keep_mu = !c.drop_mu;
    return opt;
}

Bits parse_code(const std::string& text)
{
    Bits code = bits_from_string(text);
    if (code.empty() || code.front() != 1) throw DomainError("code must be non-empty and start with 1");
    return code;
}

struct BarsArgs {
    TheoryCommon common;
    std::string mu_range = "1e-8:1e-1";
    std::string nu_range = "0.05:0.99";
    std::string res = "600:300";
    bool linear_mu = false;
    std::string out;
    std::string img;
    std::optional<unsigned> workers;
};

int cmd_theory_bars(const BarsArgs& args, std::ostream& out)
{
    theory::DiagramConfig cfg;
    cfg.code = parse_code(args.common.code);
    cfg.base = common_params(args.common);
    cfg.iterate = common_iterate(args.common);
    std::tie(cfg.mu_lo, cfg.mu_hi) = parse_range(args.mu_range);
    std::tie(cfg.nu_lo, cfg.nu_hi) = parse_range(args.nu_range);
    std::tie(cfg.n_mu, cfg.n_nu) = parse_pair_u32(args.res);
    cfg.log_mu = !args.linear_mu;
    cfg.validate();
    if (args.out.empty() && args.img.empty()) throw DomainError("bars needs --out and/or --img");
    if (!args.out.empty()) require_writable_target(args.out);
    if (!args.img.empty()) {
        require_writable_target(args.img);
        image_format_for(args.img);
    }
    const unsigned workers = resolve_workers(args.workers);

    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = theory::diagram_sweep(cfg, workers);
    const double wall = seconds_since(t0);
    const GridFile file = theory::diagram_to_grid_file(grid);

    RunManifest manifest;
    manifest.config_hash =
        fnv1a64(fmt::format("{}mu={}:{}\nnu={}:{}\nres={}:{}\n", file.extension, cfg.mu_lo, cfg.mu_hi, cfg.nu_lo,
                            cfg.nu_hi, cfg.n_mu, cfg.n_nu));
    manifest.wall_time = wall;
    manifest.worker_count = workers;
    manifest.config = nlohmann::json{{"code", args.common.code},
                                     {"B0", cfg.base.B0},
                                     {"R", cfg.base.R},
                                     {"Omega0", cfg.base.Omega0},
                                     {"phi2", cfg.base.phi2},
                                     {"mu_range", {cfg.mu_lo, cfg.mu_hi}},
                                     {"nu_range", {cfg.nu_lo, cfg.nu_hi}},
                                     {"res", {cfg.n_mu, cfg.n_nu}},
                                     {"log_mu", cfg.log_mu},
                                     {"f0_signs", args.common.f0_signs},
                                     {"keep_mu", cfg.iterate.keep_mu}};

    if (!args.out.empty()) {
        write_grid_file(args.out, file);
        write_manifest(args.out, manifest);
    }
    if (!args.img.empty()) {
        const auto window = fmt::format("mu={}:{} nu0={}:{}", cfg.mu_lo, cfg.mu_hi, cfg.nu_lo, cfg.nu_hi);
        write_image_with_metadata(render_diagram(grid), args.img, manifest, 0, window);
    }

    std::array<std::size_t, 3> counts{};
    for (auto c : grid.classes) ++counts[std::min<std::size_t>(c, 2)];
    out << fmt::format("config_hash {}\ninfeasible {}\nnegative {}\npositive {}\n", hex64(manifest.config_hash),
                       counts[0], counts[1], counts[2]);
    if (counts[0] == grid.classes.size()) {
        throw NumericalError("code " + args.common.code + " is infeasible everywhere in the window");
    }
    return kOk;
}

struct RatiosArgs {
    TheoryCommon common;
    std::string n_range = "3:14";
    std::string out;
};

int cmd_theory_ratios(const RatiosArgs& args, std::ostream& out)
{
    const Bits code = parse_code(args.common.code);
    const auto p = common_params(args.common);
    const auto opt = common_iterate(args.common);
    const auto [n_lo, n_hi] = parse_pair_u32(args.n_range);
    if (n_hi <= n_lo) throw DomainError("n range must be increasing");
    if (!args.out.empty()) require_writable_target(args.out);

    std::vector<theory::ScalabilityRow> rows;
    try {
        rows = theory::scalability_check(code, p, static_cast<int>(n_lo), static_cast<int>(n_hi), opt);
    } catch (const DomainError& e) {
        throw NumericalError(std::string(e.what()) + " (code " + args.common.code + " has too few feasible intervals)");
    }
    const double target = std::exp(-2.0 * std::numbers::pi / p.Omega0);
    std::string csv = "n,width_ratio,distance_ratio,target\n";
    for (const auto& r : rows) {
        csv += fmt::format("{},{:.12g},{:.12g},{:.12g}\n", r.n, r.width_ratio, r.distance_ratio, target);
    }
    if (args.out.empty()) {
        out << csv;
    } else {
        atomic_write_file(args.out, csv);
        out << fmt::format("{} rows written to {}\n", rows.size(), args.out);
    }
    return kOk;
}

struct Map1dArgs {
    TheoryCommon common;
    double mu = 0.0;
    std::string z_range = "1e-8:1";
    std::uint32_t samples = 2000;
    std::string side = "both";
    double f0_sign = 1.0;
    std::string out;
};

int cmd_theory_map1d(const Map1dArgs& args, std::ostream& out)
{
    const auto p = common_params(args.common);
    const auto [z_lo, z_hi] = parse_range(args.z_range);
    if (!(z_lo > 0.0) || !(z_hi > z_lo)) throw DomainError("z range must satisfy 0 < lo < hi (magnitudes of z)");
    if (args.samples < 2) throw DomainError("at least two samples per side are needed");
    if (args.side != "both" && args.side != "pos" && args.side != "neg") {
        throw DomainError("side must be both, pos or neg");
    }
    if (args.f0_sign != 1.0 && args.f0_sign != -1.0) throw DomainError("f0 sign must be +1 or -1");
    if (!args.out.empty()) require_writable_target(args.out);

    std::vector<double> zs;
    const double l0 = std::log(z_lo);
    const double l1 = std::log(z_hi);
    auto magnitude = [&](std::uint32_t k) { return std::exp(l0 + (l1 - l0) * k / (args.samples - 1)); };
    if (args.side != "pos") {
        for (std::uint32_t k = args.samples; k-- > 0;) zs.push_back(-magnitude(k));
    }
    if (args.side != "neg") {
        for (std::uint32_t k = 0; k < args.samples; ++k) zs.push_back(magnitude(k));
    }
    std::string csv = "z,zbar\n";
    for (double z : zs) {
        csv += fmt::format("{:.12g},{:.12g}\n", z, theory::map_1d(z, args.mu, p, args.f0_sign));
    }
    if (args.out.empty()) {
        out << csv;
    } else {
        atomic_write_file(args.out, csv);
        out << fmt::format("{} samples written to {}\n", zs.size(), args.out);
    }
    return kOk;
}

// ---------------------------------------------------------------- refine

struct RefineArgs {
    std::string data;
    std::string cells;
    std::string seed_point;
    double tol = 1e-9;
    bool json = false;
};

std::pair<CellIndex, CellIndex> parse_cells(const std::string& text)
{
    auto parse_cell = [](std::string_view s) {
        const auto comma = s.find(',');
        if (comma == std::string_view::npos) throw DomainError("cells must be given as p1,q1:p2,q2");
        const auto pq = parse_pair_u32(std::string(s.substr(0, comma)) + ":" + std::string(s.substr(comma + 1)));
        return CellIndex{pq.first, pq.second};
    };
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DomainError("cells must be given as p1,q1:p2,q2");
    return {parse_cell(std::string_view(text).substr(0, colon)), parse_cell(std::string_view(text).substr(colon + 1))};
}

std::pair<CellIndex, CellIndex> cells_near_seed(const SweepGrid& grid, double u, double v)
{
    const auto& c = grid.config;
    auto to_index = [](double x, double lo, double hi, std::uint32_t n) {
        const double t = std::round((x - lo) / (hi - lo) * (n - 1));
        if (!(t >= 0.0) || t > n - 1) throw DomainError("seed point lies outside the stored grid");
        return static_cast<std::uint32_t>(t);
    };
    const std::uint32_t p = to_index(u, c.u_lo, c.u_hi, c.nu);
    const std::uint32_t q = to_index(v, c.v_lo, c.v_hi, c.nv);
    const CellIndex here{p, q};
    if (grid.cell_class(p, q) != CellClass::Ok) throw NumericalError("no boundary: seed cell has no kneading value");
    // Neighbours on the side of the seed point come first.
    const auto [cu, cv] = c.cell_uv(p, q);
    const int du = u >= cu ? 1 : -1;
    const int dv = v >= cv ? 1 : -1;
    const int cand[4][2] = {{du, 0}, {-du, 0}, {0, dv}, {0, -dv}};
    for (const auto& d : cand) {
        const std::int64_t pp = std::int64_t(p) + d[0];
        const std::int64_t qq = std::int64_t(q) + d[1];
        if (pp < 0 || qq < 0 || pp >= c.nu || qq >= c.nv) continue;
        const CellIndex other{static_cast<std::uint32_t>(pp), static_cast<std::uint32_t>(qq)};
        if (grid.cell_class(other.p, other.q) == CellClass::Ok && grid.value(other.p, other.q) != grid.value(p, q)) {
            return {here, other};
        }
    }
    throw NumericalError("no boundary next to the seed point");
}

int cmd_refine(const RefineArgs& args, std::ostream& out)
{
    if (args.cells.empty() == args.seed_point.empty()) {
        throw DomainError("give exactly one of --cells or --seed-point");
    }
    if (!(args.tol > 0.0)) throw DomainError("--tol must be positive");
    const GridFile file = read_grid_file(args.data);
    if (file.model_id == kTheoryModelId) throw DomainError("refine needs a sweep data file, not a diagram");
    IntegrationConfig base;
    if (const auto manifest = read_manifest(args.data); manifest && !manifest->config.empty()) {
        base = sweep_config_from_json(manifest->config).integration;
    }
    const SweepGrid grid = from_grid_file(file, base);

    std::pair<CellIndex, CellIndex> cells;
    if (!args.cells.empty()) {
        cells = parse_cells(args.cells);
    } else {
        const auto comma = args.seed_point.find(',');
        if (comma == std::string::npos) throw DomainError("seed point must be given as u,v");
        const auto uv = parse_range(args.seed_point.substr(0, comma) + ":" + args.seed_point.substr(comma + 1));
        cells = cells_near_seed(grid, uv.first, uv.second);
    }

    BoundaryPoint bp;
    try {
        bp = refine_boundary(grid.config, cells.first, cells.second, args.tol);
    } catch (const DomainError& e) {
        if (std::string_view(e.what()).find("no boundary") != std::string_view::npos) throw NumericalError(e.what());
        throw;
    }
    if (args.json) {
        out << nlohmann::json{{"u", bp.u},
                              {"v", bp.v},
                              {"width", bp.width},
                              {"value_a", bp.value_a},
                              {"value_b", bp.value_b},
                              {"probes", bp.probes},
                              {"non_robust", bp.non_robust},
                              {"cell_a", {cells.first.p, cells.first.q}},
                              {"cell_b", {cells.second.p, cells.second.q}}}
                   .dump(2)
            << "\n";
    } else {
        out << fmt::format("u {:.12f}\nv {:.12f}\nwidth {:.3g}\nvalues {:.10g} | {:.10g}\nprobes {}\nnon_robust {}\n",
                           bp.u, bp.v, bp.width, bp.value_a, bp.value_b, bp.probes, bp.non_robust);
    }
    return kOk;
}

void add_theory_common(CLI::App* app, TheoryCommon& c, bool with_code)
{
    if (with_code) app->add_option("--code", c.code, "Binary code starting with 1")->capture_default_str();
    app->add_option("--B0", c.B0, "Amplitude B0 (non-zero)")->capture_default_str();
    app->add_option("--R", c.R, "Cylinder radius")->capture_default_str();
    app->add_option("--Omega0", c.Omega0, "Frequency Omega0 > 0")->capture_default_str();
    app->add_option("--nu0", c.nu0, "Saddle index in (0, 1)")->capture_default_str();
    app->add_option("--phi2", c.phi2, "Phase")->capture_default_str();
    app->add_option("--f0-signs", c.f0_signs, "alternating, minus or plus")->capture_default_str();
    app->add_flag("--drop-mu", c.drop_mu, "Omit the mu shift inside repeated applications");
}

// Splices the entries of `sweep --config FILE` into the argument list ahead of the explicit
// flags. Keys already given on the command line keep their command-line value.
std::vector<std::string> expand_config_file(int argc, const char* const* argv)
{
    std::vector<std::string> tokens(argv, argv + argc);
    const auto sweep_it = std::find(tokens.begin(), tokens.end(), "sweep");
    if (sweep_it == tokens.end()) return tokens;
    const std::size_t sweep_pos = static_cast<std::size_t>(sweep_it - tokens.begin());

    std::optional<std::string> path;
    for (std::size_t k = sweep_pos + 1; k < tokens.size();) {
        if (tokens[k] == "--config") {
            if (k + 1 >= tokens.size()) throw DomainError("--config needs a file name");
            path = tokens[k + 1];
            tokens.erase(tokens.begin() + k, tokens.begin() + k + 2);
        } else if (tokens[k].rfind("--config=", 0) == 0) {
            path = tokens[k].substr(9);
            tokens.erase(tokens.begin() + k);
        } else {
            ++k;
        }
    }
    if (!path) return tokens;

    std::set<std::string> explicit_keys;
    for (std::size_t k = sweep_pos + 1; k < tokens.size(); ++k) {
        const auto& t = tokens[k];
        if (t.rfind("--", 0) == 0) explicit_keys.insert(t.substr(2, t.find('=') == std::string::npos ? std::string::npos : t.find('=') - 2));
    }

    std::ifstream in(*path);
    if (!in) throw IoError("cannot open config file " + *path);
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> inserted;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError(fmt::format("{}:{}: expected key=value", *path, line_no));
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") throw DomainError(fmt::format("{}:{}: invalid key", *path, line_no));
        if (explicit_keys.count(key) != 0) continue;
        if (value == "true") {
            inserted.push_back("--" + key);
        } else if (value != "false") {
            inserted.push_back("--" + key);
            inserted.push_back(value);
        }
    }
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(sweep_pos) + 1, inserted.begin(), inserted.end());
    return tokens;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Homoclinic bifurcation sweeps by symbolic kneading invariants"};
    app.name("homoclinic");
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1, 1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    ModelsInfoArgs mi;
    auto* c_mi = app.add_subcommand("models-info", "Equilibria, spectra and bifurcation flags of a model");
    c_mi->add_option("--model", mi.model, "chua or acst")->capture_default_str();
    c_mi->add_option("--a", mi.a, "Parameter a")->required();
    c_mi->add_option("--b", mi.b, "Parameter b")->required();
    c_mi->add_flag("--json", mi.json, "Machine-readable output");

    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "Biparametric kneading sweep");
    std::string config_placeholder;
    c_sw->add_option("--config", config_placeholder, "Flat key=value file with long flag names as keys");
    c_sw->add_option("--model", sw.model, "chua or acst")->capture_default_str();
    c_sw->add_option("--transform", sw.transform, "identity, polar or affine")->capture_default_str();
    c_sw->add_option("--u-range", sw.u_range, "First sweep coordinate lo:hi")->required();
    c_sw->add_option("--v-range", sw.v_range, "Second sweep coordinate lo:hi")->required();
    c_sw->add_option("--res", sw.res, "Grid resolution nu:nv")->capture_default_str();
    c_sw->add_option("--window", sw.window, "Symbol window i:j")->capture_default_str();
    c_sw->add_option("--mode", sw.mode, "full, one-sided or dcp")->capture_default_str();
    c_sw->add_option("--branch", sw.branch, "gamma1 or gamma2")->capture_default_str();
    c_sw->add_option("--q", sw.q, "Kneading ratio in (0, 1)")->capture_default_str();
    c_sw->add_option("--dt", sw.dt, "RK4 step")->capture_default_str();
    c_sw->add_option("--max-time", sw.max_time, "Integration horizon")->capture_default_str();
    c_sw->add_option("--esc-bound", sw.esc_bound, "Escape radius (max-norm)")->capture_default_str();
    c_sw->add_option("--delta", sw.delta, "Offset along the unstable direction")->capture_default_str();
    c_sw->add_option("--threshold", sw.threshold, "Symbol threshold on |x| extrema")->capture_default_str();
    c_sw->add_option("--settle-tol", sw.settle_tol, "Field norm treated as rest (0 disables)")->capture_default_str();
    c_sw->add_flag("--no-refine-extrema", sw.no_refine_extrema, "Use sampled extrema without interpolation");
    c_sw->add_option("--out", sw.out, "Data file")->required();
    c_sw->add_option("--img", sw.img, "Image file (.ppm or .png)");
    c_sw->add_option("--seed", sw.seed, "Colormap seed")->capture_default_str();
    c_sw->add_option("--workers", sw.workers, "Worker threads")->envname("CHAOS_WORKERS");
    c_sw->add_flag("--overlay", sw.overlay, "Draw analytic bifurcation curves (chua, identity)");

    auto* c_th = app.add_subcommand("theory", "Return-map diagrams and tables");
    c_th->require_subcommand(1, 1);
    BarsArgs bars;
    auto* c_bars = c_th->add_subcommand("bars", "Region diagram of a code in the (mu, nu0) plane");
    add_theory_common(c_bars, bars.common, true);
    c_bars->add_option("--mu-range", bars.mu_range, "mu range (one sign)")->capture_default_str();
    c_bars->add_option("--nu-range", bars.nu_range, "nu0 range")->capture_default_str();
    c_bars->add_option("--res", bars.res, "n_mu:n_nu")->capture_default_str();
    c_bars->add_flag("--linear-mu", bars.linear_mu, "Sample mu linearly instead of logarithmically");
    c_bars->add_option("--out", bars.out, "Data file");
    c_bars->add_option("--img", bars.img, "Image file (.ppm or .png)");
    c_bars->add_option("--workers", bars.workers, "Worker threads")->envname("CHAOS_WORKERS");

    RatiosArgs ratios;
    auto* c_ratios = c_th->add_subcommand("ratios", "Width and distance ratios of successive regions");
    add_theory_common(c_ratios, ratios.common, true);
    c_ratios->add_option("--n-range", ratios.n_range, "Sine periods n_lo:n_hi")->capture_default_str();
    c_ratios->add_option("--out", ratios.out, "CSV file (stdout when absent)");

    Map1dArgs m1;
    auto* c_m1 = c_th->add_subcommand("map1d", "Sampled graph of the one-dimensional map");
    add_theory_common(c_m1, m1.common, false);
    c_m1->add_option("--mu", m1.mu, "Splitting parameter")->capture_default_str();
    c_m1->add_option("--z-range", m1.z_range, "|z| range, log-spaced")->capture_default_str();
    c_m1->add_option("--samples", m1.samples, "Samples per side")->capture_default_str();
    c_m1->add_option("--side", m1.side, "both, pos or neg")->capture_default_str();
    c_m1->add_option("--f0-sign", m1.f0_sign, "Sign of the sine term for z < 0")->capture_default_str();
    c_m1->add_option("--out", m1.out, "CSV file (stdout when absent)");

    RefineArgs rf;
    auto* c_rf = app.add_subcommand("refine", "Bisect a symbolic boundary between two cells");
    c_rf->add_option("--data", rf.data, "Sweep data file")->required();
    c_rf->add_option("--cells", rf.cells, "Adjacent cells p1,q1:p2,q2");
    c_rf->add_option("--seed-point", rf.seed_point, "Point u,v next to the boundary");
    c_rf->add_option("--tol", rf.tol, "Final bracket length")->capture_default_str();
    c_rf->add_flag("--json", rf.json, "Machine-readable output");

    std::vector<std::string> tokens;
    try {
        tokens = expand_config_file(argc, argv);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    }

    try {
        std::vector<const char*> ptrs;
        ptrs.reserve(tokens.size());
        for (const auto& t : tokens) ptrs.push_back(t.c_str());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        if (c_mi->parsed()) return cmd_models_info(mi, out);
        if (c_sw->parsed()) return cmd_sweep(sw, out);
        if (c_bars->parsed()) return cmd_theory_bars(bars, out);
        if (c_ratios->parsed()) return cmd_theory_ratios(ratios, out);
        if (c_m1->parsed()) return cmd_theory_map1d(m1, out);
        if (c_rf->parsed()) return cmd_refine(rf, out);
        err << "no command given\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIo;
    }
}

}  // namespace homoclinic::cli
