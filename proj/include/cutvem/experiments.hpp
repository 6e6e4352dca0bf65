#pragma once

#include "cutvem/agglomeration.hpp"
#include "cutvem/levelset.hpp"
#include "cutvem/linalg.hpp"
#include "cutvem/mesh.hpp"
#include "cutvem/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cutvem {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

struct Quartiles {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Order statistics with linear interpolation at position p·(n − 1).
double quantile(std::vector<double> values, double p);
Quartiles quartiles(const std::vector<double>& values);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Condition-number ensembles

struct EnsembleSpec {
    int nodes = 20; ///< nodes per side of the structured background
    Rect domain{};
    LevelSetField levelset = LevelSetField::circle({0.5, 0.5}, 0.313);
    int realizations = 50;
    std::uint64_t seed = 1;
    double band = 1.25;
    double amplitude = 0.15;
    AgglomerationParams params;
    MaterialSpec material;
    EigenOptions eigen;
    int threads = 0; ///< 0 picks the hardware concurrency
};

struct RealizationResult {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::size_t vertices = 0;
    std::size_t faces_cut = 0;
    std::size_t faces_agg = 0;
    double min_sigma_cut = 0.0;
    double min_sigma_agg = 0.0;
    double kappa_fem = 0.0;
    double kappa_vem = 0.0;
    double kappa_agg = 0.0;
};

struct EnsembleResult {
    double h = 0.0;
    double kappa0 = 0.0; ///< condition of the uncut background mesh
    std::vector<RealizationResult> rows;
    Quartiles fem, vem, agg;
    int failures = 0;
};

/// Realization r = 1…N uses seed + r. Failed realizations are recorded and
/// skipped; more than 1% failures throws.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

/// Condition number of the unconstrained stiffness, constant null vector.
SpectrumSummary stiffness_spectrum(const PolyMesh& mesh, const MaterialSpec& material, Method method,
                                   const EigenOptions& options = {});

struct RefinementLevel {
    int cells = 0;
    EnsembleResult ensemble;
};

struct RefinementResult {
    std::vector<RefinementLevel> levels;
    double slope_uncut = 0.0;
    double slope_fem = 0.0;
    double slope_vem = 0.0;
    double slope_agg = 0.0;
};

/// One ensemble per level on a (cells + 1)² node background; slopes of
/// log median condition against log h.
RefinementResult run_refinement(const EnsembleSpec& base, const std::vector<int>& cells);

// ---------------------------------------------------------------------------
// Convergence studies

enum class Sequence { Uniform, Anisotropic, Clipped, Annulus, Bimaterial };

Sequence parse_sequence(const std::string& text);
const char* to_string(Sequence s);

struct ConvergenceSpec {
    std::string problem = "sinsin";
    double ratio = 1.0;
    Sequence sequence = Sequence::Uniform;
    /// Uniform: nodes per side. Anisotropic: k for a 2^(k+1) × 10·4^k cell
    /// grid. Clipped: n for an n × 2n cell grid of [0,1]×[0,2]. Annulus and
    /// bimaterial: cells per side of [−1.2, 1.2]².
    std::vector<int> levels;
    bool quad_background = false;
    Method method = Method::Vem;
    bool agglomerate = true;
    AgglomerationParams params;
    std::uint64_t seed = 1;
};

struct ConvergenceLevel {
    int level = 0;
    std::size_t dofs = 0;
    std::size_t faces = 0;
    double l2 = 0.0;
    double h1 = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceLevel> levels;
    /// Fitted over the last three levels against √DOFs.
    double l2_rate = 0.0;
    double h1_rate = 0.0;
};

/// Geometry of one level before agglomeration.
PolyMesh build_level_mesh(const ConvergenceSpec& spec, int level);

ConvergenceResult run_convergence(const ConvergenceSpec& spec);

/// Rate −slope of log(error) against log(√dofs) over the last three entries.
double convergence_rate(const std::vector<std::size_t>& dofs, const std::vector<double>& errors);

// Immersed geometries shared by the studies.
PolyMesh immersed_disc_mesh(const PolyMesh& background, bool keep_inclusion);
PolyMesh clipped_square_mesh(int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// σ / η sweeps

struct QualitySample {
    double x = 0.0;
    double y = 0.0;
    double sigma = 0.0;
    double eta = 0.0;
};

/// Triangle (−1,0), (1,0), (x,y) or quadrilateral (0,0), (1,0), (x,y),
/// (0,1) over a resolution × resolution grid. Degenerate points get 0.
std::vector<QualitySample> run_quality_study(bool quad, Rect range, int resolution);

// ---------------------------------------------------------------------------
// Command-line layer

struct ExperimentConfig {
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries; ///< echo, in order

    // mesh source
    std::string mesh = "structured_tri";
    std::string mesh_file;
    std::string fixture;
    double fixture_eps = 1e-5;
    int nodes = 20;
    int nx = 0;
    int ny = 0;
    Rect domain{};
    std::optional<LevelSetField> levelset;
    bool perturb = true;
    double band = 1.25;
    double amplitude = 0.15;

    AgglomerationParams params;
    bool agglomerate = true;
    Method method = Method::Vem;
    double kappa = 1.0;
    double tau_multiplier = 1.0;

    std::string problem = "sinsin";
    double ratio = 1.0;
    std::string sequence = "uniform";
    std::string background = "tri";
    std::vector<int> levels;

    int realizations = 50;
    std::uint64_t seed = 1;
    int threads = 0;
    std::size_t dense_limit = 3000;

    std::string shape = "triangle";
    Rect range{-2.0, 0.0, 2.0, 3.0};
    int resolution = 41;

    bool svg = true;
    std::string out = ".";

    /// Applies one key = value setting; throws ConfigError on unknown keys
    /// or invalid values.
    void set(const std::string& key, const std::string& value);
};

/// Reads `key = value` lines ('#' starts a comment). Throws ConfigError
/// with the offending line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

int cmd_agglomerate(const ExperimentConfig& config, std::ostream& log);
int cmd_ensemble(const ExperimentConfig& config, std::ostream& log);
int cmd_refinement(const ExperimentConfig& config, std::ostream& log);
int cmd_convergence(const ExperimentConfig& config, std::ostream& log);
int cmd_quality_study(const ExperimentConfig& config, std::ostream& log);

/// Dispatches on config.command; returns the exit code and reports errors
/// to `log`.
int run_command(const ExperimentConfig& config, std::ostream& log);

} // namespace cutvem
