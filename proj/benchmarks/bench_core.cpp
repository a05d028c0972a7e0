#include "eitmech/constants.hpp"
#include "eitmech/floquet.hpp"
#include "eitmech/lambda_system.hpp"
#include "eitmech/sim.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

using namespace eitmech;

namespace {

AtomDriveParams bench_atom() {
    return AtomDriveParams{mhz_to_radps(0.32), mhz_to_radps(10.0), mhz_to_radps(4.13),
                           mhz_to_radps(6.1)};
}

SidebandDrive bench_drive() {
    SidebandDrive d;
    d.z0 = 0.08 / (two_pi / 794.98e-9);
    d.eta = (two_pi / 794.98e-9) * d.z0;
    return d;
}

const char* kBenchConfig =
    "[atom]\nomega_p_mhz = 0.32\nomega_c_mhz = 10\ndelta_c_mhz = 4.13\ngamma_p_mhz = 6.1\n"
    "[mirror]\nmass_kg = 1e-20\nomega_m_mhz = 8\n[drive]\neta = 0.08\n";

} // namespace

static void BM_liouvillian_build(benchmark::State& state) {
    const AtomDriveParams atom = bench_atom();
    for (auto _ : state) {
        benchmark::DoNotOptimize(liouvillian_matrix(atom, cplx(1.0, 0.08)));
    }
}
BENCHMARK(BM_liouvillian_build);

static void BM_lindblad_apply(benchmark::State& state) {
    const AtomDriveParams atom = bench_atom();
    const Mat3 rho = ketbra(idx_g, idx_g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lindblad_apply(rho, atom, cplx(1.0, 0.08)));
    }
}
BENCHMARK(BM_lindblad_apply);

static void BM_steady_state(benchmark::State& state) {
    const AtomDriveParams atom = bench_atom();
    for (auto _ : state) {
        benchmark::DoNotOptimize(steady_state(atom));
    }
}
BENCHMARK(BM_steady_state);

static void BM_hierarchy(benchmark::State& state) {
    const AtomDriveParams atom = bench_atom();
    const SidebandDrive drive = bench_drive();
    const double omega_m = mhz_to_radps(8.0);
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_sideband_hierarchy(atom, drive, omega_m, order));
    }
}
BENCHMARK(BM_hierarchy)->DenseRange(1, 4);

static void BM_analytic_modulation(benchmark::State& state) {
    const AtomDriveParams atom = bench_atom();
    const double omega_m = mhz_to_radps(8.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(modulation_analytic(atom, 0.08, omega_m, atom.delta_c));
    }
}
BENCHMARK(BM_analytic_modulation);

static void BM_integrate_prescribed(benchmark::State& state) {
    const SimConfig config = load_config(kBenchConfig);
    const double t_span = static_cast<double>(state.range(0)) / config.atom.gamma_p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate_prescribed(config, t_span));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_integrate_prescribed)->Arg(10)->Arg(40);

static void BM_integrate_feedback_50_periods(benchmark::State& state) {
    const SimConfig config = load_config(std::string(kBenchConfig) + "[run]\nwp0_scale = auto\n");
    const double period = two_pi / config.mirror.omega_m;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate_feedback(config, 50.0 * period));
    }
    state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_integrate_feedback_50_periods);

static void BM_lockin(benchmark::State& state) {
    const double omega = mhz_to_radps(8.0);
    const double dt = two_pi / omega / 64.0;
    std::vector<double> t, s;
    for (int i = 0; i <= 64 * 14; ++i) {
        t.push_back(i * dt);
        s.push_back(0.01 + 0.003 * std::cos(omega * t.back() + 0.7));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(lockin(t, s, omega, 2.0 * two_pi / omega, 10));
    }
}
BENCHMARK(BM_lockin);

static void BM_gamma_eff(benchmark::State& state) {
    AtomDriveParams atom = bench_atom();
    OpticsParams optics;
    optics.k_p = two_pi / 794.98e-9;
    optics.k_c = optics.k_p;
    optics.density = 3.5e18;
    optics.length = 242e-6;
    optics.w_p0 = 2.6e-8;
    optics.w_c = 3.2e-3;
    const MirrorParams mirror{1e-20, mhz_to_radps(8.0)};
    atom.delta_c = -delta_max(atom, mirror.omega_m);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gamma_eff(atom, mirror.omega_m, mirror, optics));
    }
}
BENCHMARK(BM_gamma_eff);

BENCHMARK_MAIN();
