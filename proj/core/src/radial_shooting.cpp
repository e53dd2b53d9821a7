#include "flatgs/radial_shooting.hpp"

#include <algorithm>
#include <cmath>

#include "flatgs/error.hpp"

namespace flatgs {

const char* to_string(ShotEvent e) {
    switch (e) {
        case ShotEvent::HitZero: return "HitZero";
        case ShotEvent::SlopeZero: return "SlopeZero";
        case ShotEvent::RanOut: return "RanOut";
    }
    return "?";
}

RadialProfile::RadialProfile(std::vector<Step> steps, double end_radius, double amplitude)
    : steps_(std::move(steps)), end_radius_(end_radius), amplitude_(amplitude) {}

double RadialProfile::component(double s, int k) const {
    if (s >= end_radius_ || steps_.empty()) return 0.0;
    if (tail_start_ > 0.0 && s > tail_start_) {
        const double L = end_radius_ - tail_start_, z = (end_radius_ - s) / L;
        return k == 0 ? tail_value_ * std::pow(z, tail_nu_)
                      : -tail_value_ * tail_nu_ / L * std::pow(z, tail_nu_ - 1.0);
    }
    if (s <= 0.0) return k == 0 ? amplitude_ : 0.0;
    auto it = std::upper_bound(steps_.begin(), steps_.end(), s,
                               [](double v, const Step& st) { return v < st.r0; });
    const Step& st = *std::prev(it);
    const double th = std::clamp((s - st.r0) / st.h, 0.0, 1.0);
    const auto& c = st.c[static_cast<std::size_t>(k)];
    const double t1 = 1.0 - th;
    return c[0] + th * (c[1] + t1 * (c[2] + th * (c[3] + t1 * c[4])));
}

double RadialProfile::operator()(double r) const {
    return u_scale_ * std::max(0.0, component(std::abs(r) / r_scale_, 0));
}

double RadialProfile::derivative(double r) const {
    return u_scale_ / r_scale_ * component(std::abs(r) / r_scale_, 1);
}

RadialProfile RadialProfile::with_tail(double r_start, double R, double nu) const {
    RadialProfile p = *this;
    const double s0 = r_start / r_scale_;
    p.tail_value_ = component(s0, 0);
    p.tail_start_ = s0;
    p.end_radius_ = R / r_scale_;
    p.tail_nu_ = nu;
    return p;
}

RadialProfile RadialProfile::rescaled(double u_scale, double r_scale) const {
    RadialProfile p = *this;
    p.u_scale_ *= u_scale;
    p.r_scale_ *= r_scale;
    return p;
}

namespace {

// Dormand–Prince 5(4) tableau and Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

using Vec = std::array<double, 2>;

struct Rhs {
    double alpha, beta, lambda;
    int N;

    double f(double u) const {
        const double a = std::abs(u);
        if (a == 0.0) return 0.0;
        const double s = u > 0 ? 1.0 : -1.0;
        return s * (std::pow(a, alpha) - lambda * std::pow(a, beta));
    }
    Vec operator()(double r, const Vec& y) const {
        if (r == 0.0) return {y[1], f(y[0]) / N};
        return {y[1], f(y[0]) - (N - 1) * y[1] / r};
    }
};

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out = y;
    for (auto [c, k] : terms) {
        out[0] += h * c * (*k)[0];
        out[1] += h * c * (*k)[1];
    }
    return out;
}

double dense_eval(const RadialProfile::Step& st, double th, int k) {
    const auto& c = st.c[static_cast<std::size_t>(k)];
    const double t1 = 1.0 - th;
    return c[0] + th * (c[1] + t1 * (c[2] + th * (c[3] + t1 * c[4])));
}

// Locates the zero of component k inside the step by bisection on θ.
double locate(const RadialProfile::Step& st, int k) {
    double lo = 0.0, hi = 1.0;
    const double flo = dense_eval(st, lo, k);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = dense_eval(st, mid, k);
        if ((fm > 0.0) == (flo > 0.0) && fm != 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

}  // namespace

ShotProfile shoot_radial(const ProblemParams& params, double amplitude, const ShootOptions& opt) {
    if (!(amplitude > 0.0)) throw DomainError("shooting amplitude must be positive");
    const double alpha = params.alpha(), beta = params.beta();
    const Rhs rhs{alpha, beta, params.lambda, params.dimension};

    // Natural length scale: u'' ~ u^α balances when r ~ u^{(1-α)/2}.
    double scale = std::pow(amplitude, 0.5 * (1.0 - alpha));
    if (params.lambda > 0.0)
        scale = std::max(scale, std::pow(ode_equilibrium(params), 0.5 * (1.0 - alpha)));
    const double r_end = opt.max_radius > 0.0 ? opt.max_radius : 1e3 * scale;
    const double atol = opt.atol * amplitude;

    ShotProfile shot;
    shot.amplitude = amplitude;
    std::vector<RadialProfile::Step> steps;

    double r = 0.0;
    Vec y{amplitude, 0.0};
    Vec k1 = rhs(r, y);
    double h = 1e-3 * scale;
    bool declined = false;
    long n_steps = 0;
    double err_prev = 1e-4;

    while (true) {
        if (n_steps >= opt.max_steps || r >= r_end) {
            shot.event = ShotEvent::RanOut;
            break;
        }
        if (h < 1e-14 * (r + scale))
            throw SolverError("shooting: step-size underflow", {r, y[0], y[1], h});
        h = std::min(h, r_end - r);

        const Vec k2 = rhs(r + c2 * h, axpy(y, h, {{a21, &k1}}));
        const Vec k3 = rhs(r + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const Vec k4 = rhs(r + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec k5 = rhs(r + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec k6 = rhs(r + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const Vec y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const Vec k7 = rhs(r + h, y1);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double sc = atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(0.5 * err);
        if (!(err <= 1.0)) {
            h *= std::max(0.2, 0.9 * std::pow(std::isfinite(err) ? err : 1e10, -0.2));
            continue;
        }

        RadialProfile::Step st;
        st.r0 = r;
        st.h = h;
        for (int i = 0; i < 2; ++i) {
            const double ydiff = y1[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            auto& c = st.c[static_cast<std::size_t>(i)];
            c[0] = y[i];
            c[1] = ydiff;
            c[2] = bspl;
            c[3] = ydiff - h * k7[i] - bspl;
            c[4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        ++n_steps;

        if (y1[0] <= 0.0) {
            const double th = locate(st, 0);
            shot.event = ShotEvent::HitZero;
            shot.terminal_radius = r + th * h;
            shot.terminal_value = 0.0;
            shot.terminal_slope = dense_eval(st, th, 1);
            steps.push_back(st);
            break;
        }
        if (y1[1] < 0.0) declined = true;
        if (declined && y1[1] >= 0.0 && r > 0.0) {
            const double th = y[1] < 0.0 ? locate(st, 1) : 0.0;
            shot.event = ShotEvent::SlopeZero;
            shot.terminal_radius = r + th * h;
            shot.terminal_value = dense_eval(st, th, 0);
            shot.terminal_slope = 0.0;
            steps.push_back(st);
            break;
        }
        if (opt.keep_dense) steps.push_back(st);

        r += h;
        y = y1;
        k1 = k7;
        // PI step-size controller.
        const double e = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, 10.0);
        err_prev = e;
        h *= fac;
        shot.terminal_radius = r;
        shot.terminal_value = y[0];
        shot.terminal_slope = y[1];
    }
    shot.steps = n_steps;
    if (opt.keep_dense)
        shot.profile = std::make_shared<RadialProfile>(
            std::move(steps), shot.event == ShotEvent::RanOut ? r : shot.terminal_radius, amplitude);
    return shot;
}

}  // namespace flatgs
