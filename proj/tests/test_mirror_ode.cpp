#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"
#include "eitmech/mirror.hpp"
#include "eitmech/ode.hpp"
#include "eitmech/params.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace eitmech;

namespace {

const MirrorParams kMirror{1e-20, mhz_to_radps(8.0)};

// Integrate the bare mirror under a supplied force law.
template <typename Force>
void run_mirror(const MirrorParams& mirror, double z0, double t1, double rtol, double atol,
                const Force& force, std::vector<double>& ts, std::vector<double>& zs,
                std::vector<double>& ps) {
    Dopri5<2> stepper;
    stepper.rel_tol = rtol;
    stepper.abs_tol = atol;
    stepper.abs_scale[0] = std::max(std::abs(z0), 1e-12);
    stepper.abs_scale[1] = mirror.mass * mirror.omega_m * stepper.abs_scale[0];
    const auto rhs = [&](double t, const Dopri5<2>::State& y, Dopri5<2>::State& dy) {
        const MirrorRhs r = oscillator_rhs(MirrorState{y[0], y[1], t}, force(t, y), mirror);
        dy[0] = r.dz;
        dy[1] = r.dp;
    };
    const double dt = two_pi / mirror.omega_m / 64.0;
    stepper.integrate(rhs, 0.0, t1, {z0, 0.0}, dt, [&](double t, const Dopri5<2>::State& y) {
        ts.push_back(t);
        zs.push_back(y[0]);
        ps.push_back(y[1]);
    });
}

} // namespace

TEST_CASE("oscillator_rhs is the first-order form of Newton's equation") {
    const MirrorRhs r = oscillator_rhs(MirrorState{2e-9, 3e-22, 0.0}, 1e-15, kMirror);
    CHECK(r.dz == doctest::Approx(3e-22 / kMirror.mass).epsilon(1e-15));
    CHECK(r.dp ==
          doctest::Approx(-kMirror.mass * kMirror.omega_m * kMirror.omega_m * 2e-9 + 1e-15)
              .epsilon(1e-15));
}

TEST_CASE("free oscillator follows the exact solution to 1e-8 per period") {
    const double z0 = 1e-8;
    const int periods = 20;
    std::vector<double> ts, zs, ps;
    run_mirror(kMirror, z0, periods * two_pi / kMirror.omega_m, 1e-8, 1e-12,
               [](double, const Dopri5<2>::State&) { return 0.0; }, ts, zs, ps);
    double worst = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        const double exact_z = z0 * std::cos(kMirror.omega_m * ts[i]);
        const double exact_p = -kMirror.mass * kMirror.omega_m * z0 * std::sin(kMirror.omega_m * ts[i]);
        worst = std::max(worst, std::hypot(zs[i] - exact_z, (ps[i] - exact_p) /
                                                             (kMirror.mass * kMirror.omega_m)) / z0);
    }
    CHECK(worst < 1e-8 * periods);
}

TEST_CASE("constant force shifts the equilibrium by F/(M omega^2)") {
    const double f0 = 2e-13;
    std::vector<double> ts, zs, ps;
    // start at the shifted equilibrium: motion should stay put
    const double zeq = f0 / (kMirror.mass * kMirror.omega_m * kMirror.omega_m);
    run_mirror(kMirror, zeq, 5 * two_pi / kMirror.omega_m, 1e-10, 1e-14,
               [&](double, const Dopri5<2>::State&) { return f0; }, ts, zs, ps);
    for (double z : zs) CHECK(z == doctest::Approx(zeq).epsilon(1e-8));
}

TEST_CASE("resonant drive grows linearly at F1 t / (2 M omega)") {
    const double f1 = 1e-16;
    std::vector<double> ts, zs, ps;
    const int periods = 40;
    run_mirror(kMirror, 0.0, periods * two_pi / kMirror.omega_m, 1e-10, 1e-14,
               [&](double t, const Dopri5<2>::State&) {
                   return f1 * std::sin(kMirror.omega_m * t);
               },
               ts, zs, ps);
    // amplitude after n full periods: F1 t / (2 M omega) (textbook resonant growth)
    const double t_end = ts.back();
    const double expected = f1 * t_end / (2.0 * kMirror.mass * kMirror.omega_m);
    double peak = 0.0;
    for (size_t i = ts.size() - 70; i < ts.size(); ++i) peak = std::max(peak, std::abs(zs[i]));
    CHECK(peak == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("intrinsic damping hook decays the free mirror envelope") {
    MirrorParams damped = kMirror;
    damped.intrinsic_damping = 1e-3 * kMirror.omega_m;
    const double z0 = 1e-8;
    std::vector<double> ts, zs, ps;
    const int periods = 30;
    run_mirror(damped, z0, periods * two_pi / damped.omega_m, 1e-10, 1e-14,
               [](double, const Dopri5<2>::State&) { return 0.0; }, ts, zs, ps);
    const EnvelopeState tail = envelope_state(MirrorState{zs.back(), ps.back(), ts.back()}, damped);
    CHECK(tail.amplitude ==
          doctest::Approx(z0 * std::exp(-0.5 * damped.intrinsic_damping * ts.back()))
              .epsilon(1e-4));
}

TEST_CASE("static_force") {
    CHECK(static_force(0.0, 0.0) == 0.0);
    // control beam dominates: 2 W_c / c at the reference powers
    const double f = static_force(2.6e-8, 3.2e-3);
    CHECK(f == doctest::Approx(2.135e-11).epsilon(1e-3));
    CHECK(static_force(2 * 2.6e-8, 2 * 3.2e-3) == doctest::Approx(2.0 * f).epsilon(1e-14));
    CHECK_THROWS_AS(static_force(-1.0, 0.0), ValidationError);
}

TEST_CASE("feedback_force: zero at DC, odd, amplitude F0 A delta_rho") {
    const SimConfig config = load_config(eitmech::testutil::reference_config_text());
    const DerivedParams derived = derive_quantities(config);
    CHECK(feedback_force(0.0123, 0.0123, config.optics, derived) == 0.0);
    const double up = feedback_force(0.0123 + 4e-3, 0.0123, config.optics, derived);
    const double down = feedback_force(0.0123 - 4e-3, 0.0123, config.optics, derived);
    CHECK(up == doctest::Approx(-down).epsilon(1e-14));
    CHECK(std::abs(up) == doctest::Approx(derived.f0 * derived.a_gain * 4e-3).epsilon(1e-12));
    CHECK(up < 0.0); // more absorption -> less pressure
}

TEST_CASE("equilibrium_shift") {
    const SimConfig config = load_config(eitmech::testutil::reference_config_text());
    const DerivedParams derived = derive_quantities(config);
    SUBCASE("frozen reference value") {
        const double zeq = equilibrium_shift(config.optics, derived, config.mirror, 0.0);
        CHECK(zeq == doctest::Approx(8.449e-7).epsilon(1e-3));
        // far larger than the oscillation amplitude, which justifies the
        // shifted-origin treatment
        CHECK(zeq > 10.0 * config.drive.z0);
    }
    SUBCASE("zero powers, zero shift") {
        OpticsParams o = config.optics;
        o.w_p0 = 0.0;
        o.w_c = 0.0;
        CHECK(equilibrium_shift(o, derived, config.mirror, 0.0) == 0.0);
    }
    SUBCASE("rho'' = 1/A removes the probe contribution") {
        OpticsParams o = config.optics;
        o.w_c = 0.0;
        CHECK(equilibrium_shift(o, derived, config.mirror, 1.0 / derived.a_gain) ==
              doctest::Approx(0.0).epsilon(1e-18));
    }
}

TEST_CASE("envelope_predict and mechanical_energy") {
    SUBCASE("rate zero keeps the amplitude") {
        CHECK(envelope_predict(1e-8, 0.0, 1.0) == 1e-8);
    }
    SUBCASE("amplitude e-folds at t = 2/Gamma") {
        CHECK(envelope_predict(1e-8, 5e4, 2.0 / 5e4) ==
              doctest::Approx(1e-8 / std::exp(1.0)).epsilon(1e-12));
    }
    SUBCASE("negative rate grows") {
        CHECK(envelope_predict(1e-8, -5e4, 1e-4) > 1e-8);
    }
    SUBCASE("energy law is the amplitude-squared law exactly") {
        const double z0 = 1e-8, gamma = 3e4;
        for (double t : {0.0, 1e-5, 5e-5}) {
            const double z = envelope_predict(z0, gamma, t);
            const double e = 0.5 * kMirror.mass * kMirror.omega_m * kMirror.omega_m * z * z;
            const double e0 = 0.5 * kMirror.mass * kMirror.omega_m * kMirror.omega_m * z0 * z0;
            CHECK(e == doctest::Approx(e0 * std::exp(-gamma * t)).epsilon(1e-12));
        }
    }
    SUBCASE("mechanical energy values") {
        CHECK(mechanical_energy(MirrorState{0.0, 0.0, 0.0}, kMirror) == 0.0);
        const double z0 = 0.08 / (two_pi / 794.98e-9);
        const double e = mechanical_energy(MirrorState{z0, 0.0, 0.0}, kMirror);
        CHECK(e == doctest::Approx(0.5 * kMirror.mass * kMirror.omega_m * kMirror.omega_m * z0 * z0)
                       .epsilon(1e-14));
        // order 2e5 hbar omega_m at the reference point
        CHECK(e / (hbar * kMirror.omega_m) == doctest::Approx(2.4e5).epsilon(0.05));
    }
    SUBCASE("envelope state ties b_m, amplitude, and energy together") {
        const MirrorState st{3e-9, 2e-22, 0.0};
        const EnvelopeState e = envelope_state(st, kMirror);
        CHECK(e.amplitude ==
              doctest::Approx(std::hypot(st.z, st.p / (kMirror.mass * kMirror.omega_m)))
                  .epsilon(1e-14));
        CHECK(e.energy == doctest::Approx(0.5 * kMirror.mass * kMirror.omega_m * kMirror.omega_m *
                                          e.amplitude * e.amplitude)
                              .epsilon(1e-12));
    }
}

TEST_CASE("dopri5 dense output is consistent with the flow") {
    // Solve y' = cos(t) with dense samples; compare with sin(t).
    Dopri5<1> stepper;
    stepper.rel_tol = 1e-10;
    stepper.abs_tol = 1e-14;
    double worst = 0.0;
    stepper.integrate([](double t, const Dopri5<1>::State&, Dopri5<1>::State& dy) { dy[0] = std::cos(t); },
                      0.0, 20.0, {0.0}, 0.01,
                      [&](double t, const Dopri5<1>::State& y) {
                          worst = std::max(worst, std::abs(y[0] - std::sin(t)));
                      });
    CHECK(worst < 1e-8);
}

TEST_CASE("dopri5 rejects empty spans and reports underflow") {
    Dopri5<1> stepper;
    CHECK_THROWS_AS(
        stepper.integrate([](double, const Dopri5<1>::State&, Dopri5<1>::State& dy) { dy[0] = 0.0; },
                          1.0, 1.0, {0.0}, 0.1, [](double, const Dopri5<1>::State&) {}),
        ValidationError);
    // a discontinuous explosion forces the step size under the floor
    Dopri5<1> hard;
    hard.rel_tol = 1e-10;
    hard.abs_tol = 1e-14;
    CHECK_THROWS_AS(
        hard.integrate(
            [](double t, const Dopri5<1>::State&, Dopri5<1>::State& dy) {
                dy[0] = (t < 0.5) ? 1.0 : 1.0 / std::max(0.0, 1.0 - t) ;
            },
            0.0, 2.0, {0.0}, 0.1, [](double, const Dopri5<1>::State&) {}),
        NumericalError);
}
