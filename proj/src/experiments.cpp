#include "cutvem/experiments.hpp"

#include "cutvem/element.hpp"
#include "cutvem/embed.hpp"
#include "cutvem/errors.hpp"
#include "cutvem/fixtures.hpp"
#include "cutvem/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace cutvem {

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw Error("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values)
{
    return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
            quantile(values, 1.0)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2)
        return 0.0;
    const double mx = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

SpectrumSummary stiffness_spectrum(const PolyMesh& mesh, const MaterialSpec& material, Method method,
                                   const EigenOptions& options)
{
    const SparseSymMatrix K = assemble_stiffness(mesh, material, method);
    return extreme_nonzero_eigs(K, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(K.size())), options);
}

namespace {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn)
{
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers)
                fn(i);
        });
    for (auto& t : pool)
        t.join();
}

} // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec)
{
    spec.params.validate();
    if (spec.realizations < 1)
        throw ConfigError("ensemble size must be positive");
    EnsembleResult result;
    const PolyMesh background = generate_structured_tri(spec.nodes, spec.nodes, spec.domain);
    result.h = spec.domain.width() / (spec.nodes - 1);
    result.kappa0 = stiffness_spectrum(background, spec.material, Method::Fem, spec.eigen).condition;

    result.rows.resize(static_cast<std::size_t>(spec.realizations));
    parallel_for(spec.realizations, spec.threads, [&](int r) {
        RealizationResult& row = result.rows[static_cast<std::size_t>(r)];
        row.index = r + 1;
        row.seed = spec.seed + static_cast<std::uint64_t>(row.index);
        try {
            const PolyMesh moved =
                perturb_vertices(background, spec.levelset, result.h, row.seed, spec.band, spec.amplitude);
            const PolyMesh cut = cut_mesh(moved, sample_levelset(moved, spec.levelset));
            PolyMesh agg = cut;
            const AgglomerationReport rep = agglomerate(agg, spec.params, spec.material);
            row.vertices = cut.num_vertices();
            row.faces_cut = cut.num_faces();
            row.faces_agg = agg.num_faces();
            row.min_sigma_cut = rep.profile_before.front().second;
            row.min_sigma_agg = rep.profile_after.front().second;
            row.kappa_fem = stiffness_spectrum(cut, spec.material, Method::Fem, spec.eigen).condition;
            row.kappa_vem = stiffness_spectrum(cut, spec.material, Method::Vem, spec.eigen).condition;
            row.kappa_agg = stiffness_spectrum(agg, spec.material, Method::Vem, spec.eigen).condition;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });

    std::vector<double> fem, vem, agg;
    for (const auto& row : result.rows) {
        if (!row.ok) {
            ++result.failures;
            continue;
        }
        fem.push_back(row.kappa_fem);
        vem.push_back(row.kappa_vem);
        agg.push_back(row.kappa_agg);
    }
    if (result.failures * 100 > spec.realizations || fem.empty())
        throw Error(std::to_string(result.failures) + " of " + std::to_string(spec.realizations)
                    + " realizations failed");
    result.fem = quartiles(fem);
    result.vem = quartiles(vem);
    result.agg = quartiles(agg);
    return result;
}

RefinementResult run_refinement(const EnsembleSpec& base, const std::vector<int>& cells)
{
    RefinementResult result;
    std::vector<double> logh, uncut, fem, vem, agg;
    for (int c : cells) {
        EnsembleSpec spec = base;
        spec.nodes = c + 1;
        RefinementLevel level{c, run_ensemble(spec)};
        logh.push_back(std::log(level.ensemble.h));
        uncut.push_back(std::log(level.ensemble.kappa0));
        fem.push_back(std::log(level.ensemble.fem.median));
        vem.push_back(std::log(level.ensemble.vem.median));
        agg.push_back(std::log(level.ensemble.agg.median));
        result.levels.push_back(std::move(level));
    }
    result.slope_uncut = fit_slope(logh, uncut);
    result.slope_fem = fit_slope(logh, fem);
    result.slope_vem = fit_slope(logh, vem);
    result.slope_agg = fit_slope(logh, agg);
    return result;
}

Sequence parse_sequence(const std::string& text)
{
    if (text == "uniform")
        return Sequence::Uniform;
    if (text == "anisotropic")
        return Sequence::Anisotropic;
    if (text == "clipped")
        return Sequence::Clipped;
    if (text == "annulus")
        return Sequence::Annulus;
    if (text == "bimaterial")
        return Sequence::Bimaterial;
    throw ConfigError("unknown sequence '" + text + "'");
}

const char* to_string(Sequence s)
{
    switch (s) {
    case Sequence::Uniform:
        return "uniform";
    case Sequence::Anisotropic:
        return "anisotropic";
    case Sequence::Clipped:
        return "clipped";
    case Sequence::Annulus:
        return "annulus";
    case Sequence::Bimaterial:
        return "bimaterial";
    }
    return "unknown";
}

PolyMesh immersed_disc_mesh(const PolyMesh& background, bool keep_inclusion)
{
    const double a = 0.4, b = 1.0;
    CutOptions outer;
    outer.interface_tag = kOuterCircleTag;
    outer.relabel = [](int, int side) { return side == 0 ? kMatrixDomain : kExteriorDomain; };
    const PolyMesh first = cut_mesh(background, sample_levelset(background, LevelSetField::circle({0, 0}, b)), outer);

    CutOptions inner;
    inner.interface_tag = kInnerCircleTag;
    inner.relabel = [](int old_id, int side) {
        if (old_id == kExteriorDomain)
            return kExteriorDomain;
        return side == 0 ? kInclusionDomain : kMatrixDomain;
    };
    const PolyMesh second = cut_mesh(first, sample_levelset(first, LevelSetField::circle({0, 0}, a)), inner);
    if (keep_inclusion)
        return discard_subdomain(second, kExteriorDomain).mesh;
    return discard_subdomains(second, {kExteriorDomain, kInclusionDomain}).mesh;
}

PolyMesh clipped_square_mesh(int n, std::uint64_t seed)
{
    const PolyMesh background = generate_structured_tri(n + 1, 2 * n + 1, Rect{0.0, 0.0, 1.0, 2.0});
    const LevelSetField line = LevelSetField::line({0.0, 1.0}, 1.0);
    const PolyMesh moved = perturb_vertices(background, line, 1.0 / n, seed);
    return clip_halfplane(moved, {0.0, 1.0}, 1.0, -1, kClipTag);
}

PolyMesh build_level_mesh(const ConvergenceSpec& spec, int level)
{
    switch (spec.sequence) {
    case Sequence::Uniform:
        return generate_structured_tri(level, level);
    case Sequence::Anisotropic: {
        const int cx = 2 << level;
        const int cy = 10 << (2 * level);
        return generate_anisotropic_tri(cx + 1, cy + 1);
    }
    case Sequence::Clipped:
        return clipped_square_mesh(level, spec.seed + static_cast<std::uint64_t>(level));
    case Sequence::Annulus:
    case Sequence::Bimaterial: {
        const Rect box{-1.2, -1.2, 1.2, 1.2};
        const PolyMesh background = spec.quad_background ? generate_structured_quad(level + 1, level + 1, box)
                                                         : generate_structured_tri(level + 1, level + 1, box);
        return immersed_disc_mesh(background, spec.sequence == Sequence::Bimaterial);
    }
    }
    throw ConfigError("unknown sequence");
}

double convergence_rate(const std::vector<std::size_t>& dofs, const std::vector<double>& errors)
{
    const std::size_t n = std::min(dofs.size(), errors.size());
    const std::size_t first = n > 3 ? n - 3 : 0;
    std::vector<double> x, y;
    for (std::size_t i = first; i < n; ++i) {
        x.push_back(std::log(std::sqrt(static_cast<double>(dofs[i]))));
        y.push_back(std::log(errors[i]));
    }
    return -fit_slope(x, y);
}

ConvergenceResult run_convergence(const ConvergenceSpec& spec)
{
    ProblemSpec problem = preset_problem(spec.problem, spec.ratio);
    ConvergenceResult result;
    std::vector<std::size_t> dofs;
    std::vector<double> l2, h1;
    for (int level : spec.levels) {
        PolyMesh mesh = build_level_mesh(spec, level);
        if (spec.agglomerate)
            agglomerate(mesh, spec.params, problem.material);
        const DiscreteSolution sol = solve_problem(mesh, problem, spec.method);
        const ErrorNorms e = error_norms(mesh, sol.u, problem);
        result.levels.push_back({level, mesh.num_vertices(), mesh.num_faces(), e.l2_rel, e.h1_rel});
        dofs.push_back(mesh.num_vertices());
        l2.push_back(e.l2_rel);
        h1.push_back(e.h1_rel);
    }
    result.l2_rate = convergence_rate(dofs, l2);
    result.h1_rate = convergence_rate(dofs, h1);
    return result;
}

std::vector<QualitySample> run_quality_study(bool quad, Rect range, int resolution)
{
    if (resolution < 2)
        throw ConfigError("resolution must be at least 2");
    std::vector<QualitySample> out;
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i) {
            QualitySample s;
            s.x = range.x0 + range.width() * i / (resolution - 1);
            s.y = range.y0 + range.height() * j / (resolution - 1);
            std::vector<Point2> poly = quad ? std::vector<Point2>{{0, 0}, {1, 0}, {s.x, s.y}, {0, 1}}
                                            : std::vector<Point2>{{-1, 0}, {1, 0}, {s.x, s.y}};
            if (is_simple_polygon(poly, 1e-9) && signed_area(poly) > 0.0) {
                try {
                    s.sigma = polygon_stability_ratio(poly);
                    s.eta = quality_metric(poly);
                } catch (const Error&) {
                    s.sigma = s.eta = 0.0;
                }
            }
            out.push_back(s);
        }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "on" || v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "off" || v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x))
        throw ConfigError(key + ": not a number: '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError(key + ": not an integer: '" + v + "'");
    return x;
}

int positive_int(const std::string& key, const std::string& v)
{
    const long long x = parse_int(key, v);
    if (x < 1 || x > 1000000)
        throw ConfigError(key + " must be a positive integer");
    return static_cast<int>(x);
}

double positive_double(const std::string& key, const std::string& v)
{
    const double x = parse_double(key, v);
    if (!(x > 0.0))
        throw ConfigError(key + " must be positive");
    return x;
}

Rect parse_rect(const std::string& key, const std::string& v)
{
    std::istringstream in(v);
    Rect r;
    std::string extra;
    if (!(in >> r.x0 >> r.y0 >> r.x1 >> r.y1) || (in >> extra) || !(r.x1 > r.x0) || !(r.y1 > r.y0))
        throw ConfigError(key + ": expected 'x0 y0 x1 y1' with x1 > x0 and y1 > y0");
    return r;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path)
    {
        if (!out_)
            throw Error("cannot write " + path.string());
        out_ << "# schema " << kCsvSchemaVersion << '\n' << header << '\n';
    }

    template <typename... Ts>
    void row(const Ts&... values)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
        out_ << '\n';
    }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    template <typename T>
    static std::string cell(const T& v)
    {
        return std::to_string(v);
    }

    std::ofstream out_;
};

std::filesystem::path prepare_out(const ExperimentConfig& config)
{
    std::filesystem::path out(config.out);
    std::filesystem::create_directories(out);
    return out;
}

void write_manifest(const ExperimentConfig& config, const std::filesystem::path& out,
                    const std::vector<std::string>& files, const nlohmann::json& summary)
{
    nlohmann::json j;
    j["command"] = config.command;
    j["library_version"] = kLibraryVersion;
    j["csv_schema"] = kCsvSchemaVersion;
    nlohmann::json echo = nlohmann::json::array();
    for (const auto& [k, v] : config.entries)
        echo.push_back({k, v});
    j["config"] = echo;
    j["seed"] = config.seed;
    j["outputs"] = files;
    j["summary"] = summary;
    std::ofstream f(out / "manifest.json");
    f << j.dump(2) << '\n';
}

PolyMesh mesh_from_config(const ExperimentConfig& c)
{
    if (!c.fixture.empty()) {
        if (c.fixture == "sliver_fan")
            return sliver_fan_fixture(c.fixture_eps);
        if (c.fixture == "needle")
            return needle_fixture(c.fixture_eps);
        if (c.fixture == "anisotropic144")
            return anisotropic_fixture();
        throw ConfigError("unknown fixture '" + c.fixture + "'");
    }
    const int nx = c.nx > 0 ? c.nx : c.nodes;
    const int ny = c.ny > 0 ? c.ny : c.nodes;
    if (c.mesh == "structured_tri")
        return generate_structured_tri(nx, ny, c.domain);
    if (c.mesh == "structured_quad")
        return generate_structured_quad(nx, ny, c.domain);
    if (c.mesh == "anisotropic")
        return generate_anisotropic_tri(nx, ny, c.domain);
    if (c.mesh == "polymesh")
        return import_mesh(c.mesh_file, MeshFormat::PolyMesh);
    if (c.mesh == "triangle")
        return import_mesh(c.mesh_file, MeshFormat::TriangleNodeEle);
    throw ConfigError("unknown mesh source '" + c.mesh + "'");
}

MaterialSpec material_from_config(const ExperimentConfig& c)
{
    MaterialSpec m;
    m.default_kappa = c.kappa;
    m.tau_multiplier = c.tau_multiplier;
    return m;
}

EnsembleSpec ensemble_from_config(const ExperimentConfig& c)
{
    EnsembleSpec s;
    s.nodes = c.nodes;
    s.domain = c.domain;
    if (c.levelset)
        s.levelset = *c.levelset;
    s.realizations = c.realizations;
    s.seed = c.seed;
    s.band = c.band;
    s.amplitude = c.perturb ? c.amplitude : 0.0;
    s.params = c.params;
    s.material = material_from_config(c);
    s.eigen.dense_limit = c.dense_limit;
    s.threads = c.threads;
    return s;
}

void write_ensemble_rows(CsvWriter& csv, const EnsembleResult& r, int level)
{
    for (const auto& row : r.rows)
        csv.row(level, row.index, static_cast<unsigned long long>(row.seed), row.ok ? 1 : 0, row.vertices,
                row.faces_cut, row.faces_agg, row.min_sigma_cut, row.min_sigma_agg, row.kappa_fem, row.kappa_vem,
                row.kappa_agg);
}

constexpr const char* kEnsembleHeader =
    "level,realization,seed,ok,vertices,faces_cut,faces_agg,min_sigma_cut,min_sigma_agg,kappa_fem,kappa_vem,kappa_agg";

void write_summary_rows(CsvWriter& csv, const EnsembleResult& r, int level)
{
    auto put = [&](const char* name, const Quartiles& q) {
        csv.row(level, std::string(name), r.h, r.kappa0, q.min, q.q1, q.median, q.q3, q.max);
    };
    put("fem", r.fem);
    put("vem", r.vem);
    put("agg", r.agg);
}

} // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    if (key == "mesh")
        mesh = v;
    else if (key == "mesh_file")
        mesh_file = v;
    else if (key == "fixture")
        fixture = v;
    else if (key == "fixture_eps")
        fixture_eps = positive_double(key, v);
    else if (key == "nodes")
        nodes = std::max(2, positive_int(key, v));
    else if (key == "nx")
        nx = positive_int(key, v);
    else if (key == "ny")
        ny = positive_int(key, v);
    else if (key == "domain")
        domain = parse_rect(key, v);
    else if (key == "levelset")
        levelset = parse_levelset(v);
    else if (key == "union") {
        if (!levelset)
            throw ConfigError("union needs a preceding levelset");
        levelset = LevelSetField::unite(*levelset, parse_levelset(v));
    } else if (key == "intersect") {
        if (!levelset)
            throw ConfigError("intersect needs a preceding levelset");
        levelset = LevelSetField::intersect(*levelset, parse_levelset(v));
    } else if (key == "perturb")
        perturb = parse_bool(key, v);
    else if (key == "band")
        band = positive_double(key, v);
    else if (key == "amplitude") {
        amplitude = parse_double(key, v);
        if (amplitude < 0.0 || amplitude >= 0.5)
            throw ConfigError("amplitude must lie in [0, 0.5)");
    } else if (key == "sigma_eps" || key == "sigma-eps") {
        params.sigma_eps = parse_double(key, v);
        params.validate();
    } else if (key == "beta") {
        params.beta = parse_double(key, v);
        params.validate();
    } else if (key == "iters") {
        params.num_iter = positive_int(key, v);
    } else if (key == "agg" || key == "agglomerate")
        agglomerate = parse_bool(key, v);
    else if (key == "method") {
        if (v == "vem")
            method = Method::Vem;
        else if (v == "fem")
            method = Method::Fem;
        else
            throw ConfigError("method must be fem or vem");
    } else if (key == "kappa")
        kappa = positive_double(key, v);
    else if (key == "tau_multiplier")
        tau_multiplier = positive_double(key, v);
    else if (key == "problem") {
        try {
            preset_problem(v, 1.0);
        } catch (const UnknownPreset& e) {
            throw ConfigError(e.what());
        }
        problem = v;
    } else if (key == "ratio")
        ratio = positive_double(key, v);
    else if (key == "sequence") {
        parse_sequence(v);
        sequence = v;
    } else if (key == "background") {
        if (v != "tri" && v != "quad")
            throw ConfigError("background must be tri or quad");
        background = v;
    } else if (key == "levels") {
        levels.clear();
        std::istringstream in(v);
        std::string tok;
        while (in >> tok)
            levels.push_back(static_cast<int>(parse_int(key, tok)));
        if (levels.empty())
            throw ConfigError("levels needs at least one value");
        for (int l : levels)
            if (l < 0)
                throw ConfigError("levels must be non-negative");
    } else if (key == "n" || key == "realizations")
        realizations = positive_int(key, v);
    else if (key == "seed") {
        const long long s = parse_int(key, v);
        if (s < 0)
            throw ConfigError("seed must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    } else if (key == "threads") {
        const long long t = parse_int(key, v);
        if (t < 0 || t > 1024)
            throw ConfigError("threads must lie in [0, 1024]");
        threads = static_cast<int>(t);
    } else if (key == "dense_limit")
        dense_limit = static_cast<std::size_t>(positive_int(key, v));
    else if (key == "shape") {
        if (v != "triangle" && v != "quad")
            throw ConfigError("shape must be triangle or quad");
        shape = v;
    } else if (key == "range")
        range = parse_rect(key, v);
    else if (key == "resolution")
        resolution = std::max(2, positive_int(key, v));
    else if (key == "svg")
        svg = parse_bool(key, v);
    else if (key == "out")
        out = v;
    else
        throw ConfigError("unknown key '" + key + "'");
    entries.emplace_back(key, v);
}

ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        try {
            c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    return parse_config(in);
}

int cmd_agglomerate(const ExperimentConfig& config, std::ostream& log)
{
    const auto out = prepare_out(config);
    const MaterialSpec material = material_from_config(config);
    PolyMesh mesh = mesh_from_config(config);
    if (config.levelset) {
        double h = 0.0;
        for (auto [a, b] : mesh.boundary_edges())
            h = std::max(h, distance(mesh.vertex(a), mesh.vertex(b)));
        if (config.perturb && config.amplitude > 0.0)
            mesh = perturb_vertices(mesh, *config.levelset, h, config.seed, config.band, config.amplitude);
        mesh = cut_mesh(mesh, sample_levelset(mesh, *config.levelset));
    }
    const PolyMesh input = mesh;
    const AgglomerationReport rep = agglomerate(mesh, config.params, material);
    const PolyMesh result = mesh.compacted();

    const SpectrumSummary before = stiffness_spectrum(input, material, Method::Vem, {config.dense_limit});
    const SpectrumSummary after = stiffness_spectrum(result, material, Method::Vem, {config.dense_limit});

    std::vector<std::string> files{"mesh_in.polymesh", "mesh_out.polymesh", "iterations.csv", "merges.csv",
                                   "profile.csv"};
    export_mesh(input, (out / "mesh_in.polymesh").string(), MeshFormat::PolyMesh);
    export_mesh(result, (out / "mesh_out.polymesh").string(), MeshFormat::PolyMesh);
    {
        CsvWriter csv(out / "iterations.csv", "iteration,merges,min_sigma,faces");
        csv.row(0, 0, rep.profile_before.front().second, input.num_faces());
        for (const auto& it : rep.iterations)
            csv.row(it.iteration, it.merges, it.min_sigma_after, it.faces_after);
    }
    {
        CsvWriter csv(out / "merges.csv", "iteration,popped,partner,sigma_popped,sigma_partner,sigma_merged");
        for (const auto& m : rep.merges)
            csv.row(m.iteration, m.popped, m.partner, m.sigma_popped, m.sigma_partner, m.sigma_merged);
    }
    {
        CsvWriter csv(out / "profile.csv", "stage,rank,face,sigma");
        for (std::size_t i = 0; i < rep.profile_before.size(); ++i)
            csv.row(std::string("before"), i, rep.profile_before[i].first, rep.profile_before[i].second);
        for (std::size_t i = 0; i < rep.profile_after.size(); ++i)
            csv.row(std::string("after"), i, rep.profile_after[i].first, rep.profile_after[i].second);
    }
    if (config.svg) {
        export_mesh(input, (out / "mesh_in.svg").string(), MeshFormat::Svg);
        export_mesh(result, (out / "mesh_out.svg").string(), MeshFormat::Svg);
        PlotSeries b{"before", {}, {}, true}, a{"after", {}, {}, true};
        for (std::size_t i = 0; i < rep.profile_before.size(); ++i) {
            b.x.push_back(static_cast<double>(i + 1));
            b.y.push_back(rep.profile_before[i].second);
        }
        for (std::size_t i = 0; i < rep.profile_after.size(); ++i) {
            a.x.push_back(static_cast<double>(i + 1));
            a.y.push_back(rep.profile_after[i].second);
        }
        write_plot_svg((out / "profile.svg").string(), {b, a}, "rank", "sigma", false, true);
        files.insert(files.end(), {"mesh_in.svg", "mesh_out.svg", "profile.svg"});
    }
    nlohmann::json summary;
    summary["vertices"] = result.num_vertices();
    summary["faces_before"] = input.num_faces();
    summary["faces_after"] = result.num_faces();
    summary["min_sigma_before"] = rep.profile_before.front().second;
    summary["min_sigma_after"] = rep.profile_after.front().second;
    summary["condition_before"] = before.condition;
    summary["condition_after"] = after.condition;
    summary["merges"] = rep.total_merges();
    write_manifest(config, out, files, summary);

    log << "vertices " << result.num_vertices() << "\nfaces " << input.num_faces() << " -> " << result.num_faces()
        << "\nmin sigma " << fmt(rep.profile_before.front().second) << " -> "
        << fmt(rep.profile_after.front().second) << "\ncondition " << fmt(before.condition) << " -> "
        << fmt(after.condition) << "\nmerges " << rep.total_merges() << '\n';
    return 0;
}

int cmd_ensemble(const ExperimentConfig& config, std::ostream& log)
{
    const auto out = prepare_out(config);
    const EnsembleSpec spec = ensemble_from_config(config);
    const EnsembleResult r = run_ensemble(spec);
    {
        CsvWriter csv(out / "ensemble.csv", kEnsembleHeader);
        write_ensemble_rows(csv, r, 0);
    }
    {
        CsvWriter csv(out / "summary.csv", "level,method,h,kappa0,min,q1,median,q3,max");
        write_summary_rows(csv, r, 0);
    }
    std::vector<std::string> files{"ensemble.csv", "summary.csv"};
    if (config.svg) {
        PlotSeries fem{"fem", {}, {}, false}, vem{"vem", {}, {}, false}, agg{"agg", {}, {}, false};
        for (const auto& row : r.rows) {
            if (!row.ok)
                continue;
            fem.x.push_back(1.0);
            fem.y.push_back(row.kappa_fem);
            vem.x.push_back(2.0);
            vem.y.push_back(row.kappa_vem);
            agg.x.push_back(3.0);
            agg.y.push_back(row.kappa_agg);
        }
        write_plot_svg((out / "ensemble.svg").string(), {fem, vem, agg}, "method", "condition", false, true);
        files.push_back("ensemble.svg");
    }
    nlohmann::json summary;
    summary["kappa0"] = r.kappa0;
    summary["failures"] = r.failures;
    summary["median"] = {{"fem", r.fem.median}, {"vem", r.vem.median}, {"agg", r.agg.median}};
    summary["max"] = {{"fem", r.fem.max}, {"vem", r.vem.max}, {"agg", r.agg.max}};
    write_manifest(config, out, files, summary);
    log << "kappa0 " << fmt(r.kappa0) << "\nmedian fem " << fmt(r.fem.median) << " vem " << fmt(r.vem.median)
        << " agg " << fmt(r.agg.median) << "\nfailures " << r.failures << '\n';
    for (const auto& row : r.rows)
        if (!row.ok)
            log << "realization " << row.index << " seed " << row.seed << " failed: " << row.error << '\n';
    return 0;
}

int cmd_refinement(const ExperimentConfig& config, std::ostream& log)
{
    const auto out = prepare_out(config);
    const std::vector<int> cells = config.levels.empty() ? std::vector<int>{10, 20, 40} : config.levels;
    const RefinementResult r = run_refinement(ensemble_from_config(config), cells);
    {
        CsvWriter csv(out / "ensemble.csv", kEnsembleHeader);
        for (const auto& level : r.levels)
            write_ensemble_rows(csv, level.ensemble, level.cells);
    }
    {
        CsvWriter csv(out / "summary.csv", "level,method,h,kappa0,min,q1,median,q3,max");
        for (const auto& level : r.levels)
            write_summary_rows(csv, level.ensemble, level.cells);
    }
    {
        CsvWriter csv(out / "slopes.csv", "method,slope");
        csv.row(std::string("uncut"), r.slope_uncut);
        csv.row(std::string("fem"), r.slope_fem);
        csv.row(std::string("vem"), r.slope_vem);
        csv.row(std::string("agg"), r.slope_agg);
    }
    std::vector<std::string> files{"ensemble.csv", "summary.csv", "slopes.csv"};
    if (config.svg) {
        PlotSeries uncut{"uncut", {}, {}, true}, vem{"vem", {}, {}, true}, agg{"agg", {}, {}, true};
        for (const auto& level : r.levels) {
            for (PlotSeries* s : {&uncut, &vem, &agg})
                s->x.push_back(level.ensemble.h);
            uncut.y.push_back(level.ensemble.kappa0);
            vem.y.push_back(level.ensemble.vem.median);
            agg.y.push_back(level.ensemble.agg.median);
        }
        write_plot_svg((out / "refinement.svg").string(), {uncut, vem, agg}, "h", "median condition", true, true);
        files.push_back("refinement.svg");
    }
    nlohmann::json summary;
    summary["slopes"] = {{"uncut", r.slope_uncut}, {"fem", r.slope_fem}, {"vem", r.slope_vem}, {"agg", r.slope_agg}};
    write_manifest(config, out, files, summary);
    log << "slope uncut " << fmt(r.slope_uncut) << " fem " << fmt(r.slope_fem) << " vem " << fmt(r.slope_vem)
        << " agg " << fmt(r.slope_agg) << '\n';
    return 0;
}

int cmd_convergence(const ExperimentConfig& config, std::ostream& log)
{
    const auto out = prepare_out(config);
    ConvergenceSpec spec;
    spec.problem = config.problem;
    spec.ratio = config.ratio;
    spec.sequence = parse_sequence(config.sequence);
    spec.quad_background = config.background == "quad";
    spec.method = config.method;
    spec.agglomerate = config.agglomerate;
    spec.params = config.params;
    spec.seed = config.seed;
    spec.levels = config.levels;
    if (spec.levels.empty())
        throw ConfigError("convergence needs levels");
    const ConvergenceResult r = run_convergence(spec);
    {
        CsvWriter csv(out / "convergence.csv", "level,dofs,faces,l2_rel,h1_rel");
        for (const auto& l : r.levels)
            csv.row(l.level, l.dofs, l.faces, l.l2, l.h1);
    }
    {
        CsvWriter csv(out / "rates.csv", "norm,rate");
        csv.row(std::string("l2"), r.l2_rate);
        csv.row(std::string("h1"), r.h1_rate);
    }
    std::vector<std::string> files{"convergence.csv", "rates.csv"};
    if (config.svg) {
        PlotSeries l2{"L2", {}, {}, true}, h1{"H1", {}, {}, true};
        for (const auto& l : r.levels) {
            l2.x.push_back(std::sqrt(static_cast<double>(l.dofs)));
            h1.x.push_back(std::sqrt(static_cast<double>(l.dofs)));
            l2.y.push_back(l.l2);
            h1.y.push_back(l.h1);
        }
        write_plot_svg((out / "convergence.svg").string(), {l2, h1}, "sqrt(dofs)", "relative error", true, true);
        files.push_back("convergence.svg");
    }
    nlohmann::json summary;
    summary["l2_rate"] = r.l2_rate;
    summary["h1_rate"] = r.h1_rate;
    write_manifest(config, out, files, summary);
    for (const auto& l : r.levels)
        log << "level " << l.level << " dofs " << l.dofs << " L2 " << fmt(l.l2) << " H1 " << fmt(l.h1) << '\n';
    log << "rate L2 " << fmt(r.l2_rate) << " H1 " << fmt(r.h1_rate) << '\n';
    return 0;
}

int cmd_quality_study(const ExperimentConfig& config, std::ostream& log)
{
    const auto out = prepare_out(config);
    const bool quad = config.shape == "quad";
    const auto samples = run_quality_study(quad, config.range, config.resolution);
    {
        CsvWriter csv(out / "quality.csv", "x,y,sigma,eta");
        for (const auto& s : samples)
            csv.row(s.x, s.y, s.sigma, s.eta);
    }
    std::vector<std::string> files{"quality.csv"};
    double best_sigma = 0.0, best_eta = 0.0;
    for (const auto& s : samples) {
        best_sigma = std::max(best_sigma, s.sigma);
        best_eta = std::max(best_eta, s.eta);
    }
    if (config.svg) {
        const double dx = config.range.width() / (config.resolution - 1);
        const double dy = config.range.height() / (config.resolution - 1);
        for (const char* which : {"sigma", "eta"}) {
            SvgCanvas canvas(Rect{config.range.x0 - dx / 2, config.range.y0 - dy / 2, config.range.x1 + dx / 2,
                                  config.range.y1 + dy / 2});
            const bool is_sigma = std::string(which) == "sigma";
            for (const auto& s : samples) {
                const double v = is_sigma ? s.sigma / std::max(best_sigma, 1e-300) : s.eta;
                std::vector<Point2> cell{{s.x - dx / 2, s.y - dy / 2},
                                         {s.x + dx / 2, s.y - dy / 2},
                                         {s.x + dx / 2, s.y + dy / 2},
                                         {s.x - dx / 2, s.y + dy / 2}};
                canvas.polygon(cell, ramp_color(v), "none", 0.0);
            }
            const std::string name = std::string("quality_") + which + ".svg";
            canvas.save((out / name).string());
            files.push_back(name);
        }
    }
    nlohmann::json summary;
    summary["max_sigma"] = best_sigma;
    summary["max_eta"] = best_eta;
    write_manifest(config, out, files, summary);
    log << "samples " << samples.size() << "\nmax sigma " << fmt(best_sigma) << "\nmax eta " << fmt(best_eta)
        << '\n';
    return 0;
}

int run_command(const ExperimentConfig& config, std::ostream& log)
{
    try {
        if (config.command == "agglomerate")
            return cmd_agglomerate(config, log);
        if (config.command == "ensemble")
            return cmd_ensemble(config, log);
        if (config.command == "refinement")
            return cmd_refinement(config, log);
        if (config.command == "convergence")
            return cmd_convergence(config, log);
        if (config.command == "quality")
            return cmd_quality_study(config, log);
        log << "error: unknown command '" << config.command << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cutvem
