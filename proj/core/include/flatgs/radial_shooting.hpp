#pragma once

#include <array>
#include <memory>
#include <vector>

#include "flatgs/model.hpp"

namespace flatgs {

enum class ShotEvent { HitZero, SlopeZero, RanOut };

const char* to_string(ShotEvent e);

struct ShootOptions {
    double rtol = 1e-12;
    double atol = 1e-14;       // relative to the amplitude
    double max_radius = 0.0;   // 0: chosen from the amplitude scale
    long max_steps = 4'000'000;
    bool keep_dense = false;   // store the dense-output trajectory
};

// Continuous radial profile u(r) built from the DOPRI5 dense output of one
// shot. Evaluation beyond the terminal radius returns 0. A profile can be
// rescaled as r -> u_scale * u(r / r_scale) without re-integration.
class RadialProfile {
public:
    struct Step {
        double r0;
        double h;
        std::array<std::array<double, 5>, 2> c;  // per component: dense coefficients
    };

    RadialProfile(std::vector<Step> steps, double end_radius, double amplitude);

    double operator()(double r) const;
    double derivative(double r) const;
    double amplitude() const { return amplitude_ * u_scale_; }
    double end_radius() const { return end_radius_ * r_scale_; }
    RadialProfile rescaled(double u_scale, double r_scale) const;
    // Replaces the profile beyond r_start by u(r_start)·((R−r)/(R−r_start))^nu,
    // the degenerate free-boundary tail, ending at R. Radii are unscaled.
    RadialProfile with_tail(double r_start, double R, double nu) const;

private:
    double component(double s, int k) const;

    std::vector<Step> steps_;
    double end_radius_;
    double amplitude_;
    double u_scale_ = 1.0;
    double r_scale_ = 1.0;
    double tail_start_ = 0.0;  // 0: no tail
    double tail_value_ = 0.0;
    double tail_nu_ = 0.0;
};

struct ShotProfile {
    double amplitude = 0.0;
    double terminal_radius = 0.0;
    double terminal_value = 0.0;
    double terminal_slope = 0.0;
    ShotEvent event = ShotEvent::RanOut;
    long steps = 0;
    std::shared_ptr<const RadialProfile> profile;  // set when keep_dense
};

// Integrates u'' + (N-1)/r u' = u^α − λu^β (signed powers) from u(0) = amplitude,
// u'(0) = 0 until u hits 0, u' turns nonnegative after declining, or the
// radius budget is spent.
ShotProfile shoot_radial(const ProblemParams& params, double amplitude,
                         const ShootOptions& options = {});

}  // namespace flatgs
