#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flatgs/model.hpp"
#include "flatgs/parabolic.hpp"

namespace flatgs {

// Bumped whenever a report key is renamed or removed. The key set is
// documented in the README.
inline constexpr int kReportSchemaVersion = 1;

enum class ExperimentKind {
    Classify,
    Shoot,
    Nehari,
    JMin,
    Evolve,
    Stability,
    GlobalInstability,
    Extinction,
    Spectrum,
    Sweep
};
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

enum class GroundStateMethod { Flat, Nehari, JMin };

// Initial datum for evolve / extinction runs. Sine: first Dirichlet mode of
// the domain with max amplitude; GroundState: scale times the computed state.
struct InitialDatum {
    enum class Kind { Sine, Constant, Bump, GroundState } kind = Kind::Sine;
    double amplitude = 1.0;
};

struct PerturbationSpec {
    PerturbationShape shape = PerturbationShape::Eigenfunction;
    double delta = 1e-2;
    std::optional<std::uint64_t> seed;  // falls back to ExperimentConfig::seed
};

struct SweepAxis {
    std::string name;  // alpha | beta | lambda | dimension
    std::vector<double> values;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Classify;
    ProblemParams params;
    std::size_t grid_n = 1025;
    EvolutionConfig evolution;
    GroundStateMethod gs_method = GroundStateMethod::Flat;
    bool fit_domain = false;
    InitialDatum initial;
    PerturbationSpec perturbation;
    double epsilon = 5e-2;       // stability departure radius
    double scale = 1.05;         // global-instability multiplier / ground-state initial datum
    double floor_rel = 1e-8;     // spectrum
    std::string output_dir;      // empty: nothing written
    std::uint64_t seed = 0;

    // Sweep only.
    ExperimentKind sweep_base = ExperimentKind::Classify;
    std::vector<SweepAxis> axes;
    int parallel = 1;
};

// Parses a JSON config. Every violation is reported with its field path;
// all of them end up in a single ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

struct RunReport {
    std::string experiment;
    std::string status = "ok";  // ok | error
    std::string error;
    std::map<std::string, std::string> headline;  // formatted scalars, also used for sweep summaries
    std::vector<std::string> manifest;            // paths relative to the output dir
    double wall_clock_s = 0.0;
    std::string json;                             // the full report document
};

// Runs one experiment. Writes report.json and the CSVs into output_dir when
// it is set. Errors propagate to the caller.
RunReport run(const ExperimentConfig& config);

struct SweepPoint {
    ProblemParams params;
    RunReport report;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::string summary_csv;
    std::size_t failures = 0;
};

// Cartesian product of the axes, executed with up to config.parallel
// threads. Failed points are recorded and the sweep continues.
SweepResult sweep(const ExperimentConfig& config);

// Label counts on the cell-centred n×n lattice of (α,β) ∈ (0,1)², restricted
// to α < β. Areas are in units of the unit square.
struct RegimeMap {
    int dimension = 0;
    int n = 0;
    std::size_t points = 0;
    std::size_t stable = 0;
    std::size_t unstable = 0;
    std::size_t on_curve = 0;
    double stable_area = 0.0;
    double on_curve_area = 0.0;
};
RegimeMap regime_map(int N, int n);

}  // namespace flatgs
