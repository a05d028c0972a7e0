#pragma once

#include "eitmech/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace eitmech {

// Dormand-Prince 5(4) embedded pair with the standard quartic dense-output
// interpolant. Fixed-size state keeps the hot loop allocation-free.
//
// rhs:      dy/dt = f(t, y)
// observer: called at every uniform sample time t0 + k*sample_dt inside the
//           span (k = 0 .. floor(span/sample_dt)), using the step interpolant.
template <std::size_t N>
struct Dopri5 {
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;
    using Observer = std::function<void(double, const State&)>;

    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    // Per-component absolute scale; abs tolerance for component i is
    // abs_tol * scale[i]. Defaults to 1 for every component.
    State abs_scale = make_ones();

    static State make_ones() {
        State s;
        s.fill(1.0);
        return s;
    }

    void integrate(const Rhs& f, double t0, double t1, State y, double sample_dt,
                   const Observer& observe) const {
        if (!(t1 > t0)) throw ValidationError("ode: empty time span");
        if (!(sample_dt > 0.0)) throw ValidationError("ode: sample_dt must be positive");

        State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
        f(t0, y, k1);

        long sample_index = 0;
        const auto sample_time = [&](long i) { return t0 + sample_dt * static_cast<double>(i); };
        if (sample_time(0) >= t0) { // first sample is the initial state
            observe(t0, y);
            ++sample_index;
        }

        double t = t0;
        double h = initial_step(f, t0, y, k1);
        const double h_min = 1e-14 * (t1 - t0);
        int consecutive_rejects = 0;

        while (t < t1) {
            if (t1 - t <= h_min) break; // span exhausted to rounding
            h = std::min(h, t1 - t);
            if (h < h_min)
                throw NumericalError("ode: step size underflow at t = " + std::to_string(t));

            stages(f, t, y, k1, h, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr);

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sc =
                    abs_tol * abs_scale[i] + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double e = yerr[i] / sc;
                err += e * e;
            }
            err = std::sqrt(err / N);

            if (err <= 1.0) {
                // Dense output over [t, t+h] for samples in (t, t+h]; endpoint
                // inclusive so aligned spans hit t1 exactly.
                if (sample_time(sample_index) <= t + h + 1e-9 * h) {
                    State cont2, cont3, cont4, cont5;
                    build_interpolant(y, ynew, k1, k3, k4, k5, k6, k7, h, cont2, cont3, cont4,
                                      cont5);
                    while (true) {
                        const double ts = sample_time(sample_index);
                        if (ts > t + h + 1e-9 * h || ts > t1 + 1e-9 * h) break;
                        const double theta = std::clamp((ts - t) / h, 0.0, 1.0);
                        State ys;
                        eval_interpolant(y, cont2, cont3, cont4, cont5, theta, ys);
                        observe(std::min(ts, t1), ys);
                        ++sample_index;
                    }
                }
                t += h;
                y = ynew;
                k1 = k7; // FSAL
                const double fac = std::clamp(0.9 * std::pow(err > 0.0 ? err : 1e-10, -0.2), 0.2, 10.0);
                h *= fac;
                consecutive_rejects = 0;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (++consecutive_rejects > 60)
                    throw NumericalError("ode: repeated step rejection at t = " + std::to_string(t));
            }
        }
    }

private:
    double initial_step(const Rhs& f, double t0, const State& y, const State& k1) const {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = abs_tol * abs_scale[i] + rel_tol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        double h = (d1 > 0.0) ? 0.01 * d0 / d1 : 1e-6;
        if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6;
        // One Euler probe to bound the second derivative.
        State y1, k2;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * k1[i];
        f(t0 + h, y1, k2);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = abs_tol * abs_scale[i] + rel_tol * std::abs(y[i]);
            d2 = std::max(d2, std::abs(k2[i] - k1[i]) / sc / h);
        }
        const double m = std::max(d1, d2);
        const double h1 = (m > 1e-15) ? std::pow(0.01 / m, 0.2) : std::max(1e-6, h * 1e-3);
        return std::min(100.0 * h, h1);
    }

    static void stages(const Rhs& f, double t, const State& y, const State& k1, double h,
                       State& k2, State& k3, State& k4, State& k5, State& k6, State& k7,
                       State& ytmp, State& ynew, State& yerr) {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + h / 5.0, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + 3.0 * h / 10.0, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + 4.0 * h / 5.0, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + 8.0 * h / 9.0, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] =
                y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h, ynew, k7);
        for (std::size_t i = 0; i < N; ++i)
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                           e7 * k7[i]);
    }

    static void build_interpolant(const State& y, const State& ynew, const State& k1,
                                  const State& k3, const State& k4, const State& k5,
                                  const State& k6, const State& k7, double h, State& cont2,
                                  State& cont3, State& cont4, State& cont5) {
        constexpr double d1 = -12715105075.0 / 11282082432.0;
        constexpr double d3 = 87487479700.0 / 32700410799.0;
        constexpr double d4 = -10690763975.0 / 1880347072.0;
        constexpr double d5 = 701980252875.0 / 199316789632.0;
        constexpr double d6 = -1453857185.0 / 822651844.0;
        constexpr double d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            cont2[i] = ydiff;
            cont3[i] = bspl;
            cont4[i] = ydiff - h * k7[i] - bspl;
            cont5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                            d7 * k7[i]);
        }
    }

    static void eval_interpolant(const State& y, const State& cont2, const State& cont3,
                                 const State& cont4, const State& cont5, double theta, State& out) {
        const double th1 = 1.0 - theta;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] +
                     theta * (cont2[i] +
                              th1 * (cont3[i] + theta * (cont4[i] + th1 * cont5[i])));
    }
};

} // namespace eitmech
