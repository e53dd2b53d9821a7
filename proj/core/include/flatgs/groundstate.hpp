#pragma once

#include <memory>
#include <optional>
#include <string>

#include "flatgs/descent.hpp"
#include "flatgs/fibering.hpp"
#include "flatgs/grid.hpp"
#include "flatgs/radial_shooting.hpp"

namespace flatgs {

struct GroundState {
    Field field;
    ProblemParams params;
    double amplitude = 0.0;
    double support_radius = 0.0;
    // |du/dr| at the support edge from one-sided second-order differences.
    double flatness_defect = 0.0;
    // |u'(R*)| reported by the shooting integrator (0 for minimizers).
    double shot_slope = 0.0;
    FunctionalBreakdown breakdown;
    FiberingReport fibering;
    double pohozaev_residual = 0.0;  // raw P_λ(u)
    double energy = 0.0;
    int iterations = 0;
    std::string method;
    std::shared_ptr<const RadialProfile> profile;  // shooting-based states only

    double scale() const { return nehari_scale(breakdown, params); }
};

// Fills every diagnostic of a ground state from its field.
GroundState make_groundstate(Field field, const ProblemParams& params, std::string method);

std::string to_json(const GroundState& gs);

struct FlatOptions {
    std::size_t n = 2049;
    // Replace the domain by the support of the profile (ball of radius R*,
    // or the interval of half-length R* about the original centre).
    bool fit_domain = false;
    double bracket_tol = 1e-12;
    ShootOptions shoot;
};

// Bisection on the shooting amplitude between SlopeZero and HitZero shots.
GroundState find_flat_profile(const ProblemParams& params, const FlatOptions& options = {});

// Flat amplitude and support radius only, no embedding.
struct FlatShot {
    double amplitude;
    double support_radius;
    double slope;
    std::shared_ptr<const RadialProfile> profile;
};
FlatShot flat_shot(const ProblemParams& params, double bracket_tol = 1e-12,
                   const ShootOptions& shoot = {});

// Embeds a radial profile into the params domain (centred, zero-extended).
Field embed_profile(const RadialProfile& profile, const GridPtr& grid);

GroundState nehari_minimize(const ProblemParams& params, const GridPtr& grid,
                            const std::optional<Field>& initial = std::nullopt,
                            const DescentOptions& options = {});

GroundState j_minimize(const ProblemParams& params, const GridPtr& grid,
                       const std::optional<Field>& initial = std::nullopt,
                       const DescentOptions& options = {});

struct SecondVariationReport {
    RegimeLabel label;
    double phi2 = 0.0;         // Φ''(1) from the discrete functionals
    double closed_form = 0.0;  // flat_second_variation with the computed B(u)
    double relative_error = 0.0;
    bool sign_matches = false;
};

// flat_threshold bounds flatness_defect relative to amplitude/support_radius.
SecondVariationReport verify_second_variation(const GroundState& gs, double flat_threshold = 1e-3);

// Scales a β = 1 state to target_lambda. The result lives on the source
// domain unless another one is given.
GroundState transfer_groundstate(const GroundState& gs, double target_lambda,
                                 const std::optional<DomainSpec>& domain = std::nullopt);

}  // namespace flatgs
