#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flatgs/grid.hpp"
#include "flatgs/tridiagonal.hpp"

namespace flatgs {

struct GroundState;

struct EvolutionConfig {
    double dt = 1e-4;
    double t_end = 1.0;
    int snapshot_stride = 100;  // steps between records
    double extinction_tol = 1e-12;
    int extinction_snapshots = 10;  // consecutive records below tol
    int reaction_substeps = 4;
    bool check_dissipation = true;
    double dissipation_slack = 1e-8;  // per step, times (1 + |E(0)|)
    double growth_cap = std::numeric_limits<double>::infinity();  // on linf
    double stop_distance = std::numeric_limits<double>::infinity();  // on dist_to_ref
    bool stop_on_extinction = true;
    bool store_snapshots = false;

    void validate() const;
};

struct TrajectoryRecord {
    double t = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double h01 = 0.0;
    double energy = 0.0;
    double nehari_residual = 0.0;
    double nondeg_const = 0.0;
    double dist_to_ref = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<Field> snapshots;  // aligned with records when stored
    Field final_field;
    long steps = 0;
    double energy_slack = 0.0;
    double max_energy_increase = -std::numeric_limits<double>::infinity();
    long worst_step = -1;
    bool extinct = false;
    bool exceeded_cap = false;
    bool exceeded_distance = false;
    double min_value = 0.0;  // smallest nodal value seen (positivity check)

    std::string to_csv() const;
};

// One step of the convex splitting
//   (u' - u)/dt = -K u' - u'^α + λ u^β   (mass-lumped, u' ≥ 0),
// i.e. the convex parts of E implicit and the concave source explicit, so
// E(u') ≤ E(u) - |u' - u|²_M / dt for every dt. The nonlinear system is the
// minimizer of a strictly convex functional and is solved by tridiagonal
// Newton iterations started from a Lie-split predictor (Taylor reaction step,
// or m substeps of reaction_step near extinction, then (M + dt K) u = M u*).
class Stepper {
public:
    Stepper(const ProblemParams& params, const GridPtr& grid, double dt, int reaction_substeps);
    // energy_before, when given, receives E(u) of the input state; it comes
    // out of powers the step needs anyway. Returns the Newton iterations used.
    int advance(std::vector<double>& u, double* energy_before = nullptr) const;
    double dt() const { return dt_; }

private:
    ProblemParams params_;
    GridPtr grid_;
    double dt_;
    int substeps_;
    TridiagonalSolver solver_;
    std::vector<double> mass_;
    Stiffness K_;
};

Field step(const Field& u, const ProblemParams& params, double dt, int reaction_substeps = 4);

Trajectory evolve(const Field& v0, const ProblemParams& params, const EvolutionConfig& config,
                  const Field* reference = nullptr);

std::optional<double> extinction_time(const Trajectory& traj, double tol);

enum class VerdictKind { Stable, Departed, Extinct, GrewUnbounded };
std::string to_string(VerdictKind k);

struct StabilityVerdict {
    VerdictKind kind = VerdictKind::Stable;
    std::optional<double> time;
    double epsilon = 0.0;
    double max_distance = 0.0;

    std::string to_json() const;
};

enum class PerturbationShape { Eigenfunction, Bump, Random };
std::string to_string(PerturbationShape s);
PerturbationShape perturbation_shape_from_string(const std::string& s);

// Perturbation with H¹₀ norm delta such that base + p ≥ 0. Random shapes are
// node-wise uniform noise from a seeded mt19937_64, clipped and rescaled.
Field make_perturbation(PerturbationShape shape, const Field& base, double delta, std::uint64_t seed);

struct StabilityResult {
    StabilityVerdict verdict;
    Trajectory trajectory;
};

StabilityResult stability_experiment(const GroundState& gs, const Field& perturbation,
                                     const EvolutionConfig& config, double epsilon);

struct GlobalInstabilityResult {
    Trajectory trajectory;
    VerdictKind verdict = VerdictKind::Stable;
    std::vector<double> y;            // ‖v‖² per record
    std::vector<double> slope;        // central differences (NaN at the ends)
    std::vector<double> target;       // −2Φ'(1) per record
    double max_slope_rel_error = 0.0; // over interior records
    bool y_strictly_increasing = false;
    double y_ratio = 0.0;             // y(T)/y(0)
    bool in_well_initially = false;
    bool well_invariant = false;
};

GlobalInstabilityResult global_instability_experiment(const GroundState& gs, double r,
                                                      const EvolutionConfig& config);

struct ComparisonReport {
    double max_violation = 0.0;  // max over snapshots and nodes of (sub − super)+
    std::size_t snapshots = 0;
    double upper_nondegeneracy = 0.0;
};

ComparisonReport comparison_check(const Trajectory& lower, const Trajectory& upper);

struct DecayVerdict {
    bool decayed = false;
    std::optional<double> extinction_time;
    bool monotone_after_transient = false;
};
DecayVerdict small_data_decay(const ProblemParams& params, const Field& v0, const EvolutionConfig& config);

struct GrowthVerdict {
    bool grew = false;
    std::optional<double> cap_time;
    double final_linf = 0.0;
};
GrowthVerdict large_data_growth(const ProblemParams& params, const Field& v0, const EvolutionConfig& config);

}  // namespace flatgs
