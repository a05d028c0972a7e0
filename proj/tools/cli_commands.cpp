#include "cli_commands.hpp"

#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"
#include "eitmech/floquet.hpp"
#include "eitmech/lambda_system.hpp"
#include "eitmech/medium_optics.hpp"
#include "eitmech/mirror.hpp"
#include "eitmech/sim.hpp"
#include "eitmech/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eitmech::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_out(const GlobalOptions& opt, const std::string& name) {
    fs::create_directories(opt.out_dir);
    std::ofstream os(fs::path(opt.out_dir) / name, std::ios::binary);
    if (!os) throw ValidationError("cannot open output file " + name + " in " + opt.out_dir);
    return os;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RawDoc load_doc(const GlobalOptions& opt) {
    if (opt.config_path.empty()) throw ValidationError("--config PATH is required");
    RawDoc doc = parse_document(read_file(opt.config_path));
    for (const auto& ov : opt.overrides) doc.set_path(ov);
    return doc;
}

void write_resolved_config(const GlobalOptions& opt, const SimConfig& config) {
    auto os = open_out(opt, "resolved_config.ini");
    os << render_config(config);
}

void print_warnings(const SimConfig& config, std::ostream& log) {
    for (const auto& v : validate(config))
        if (v.severity == Violation::Severity::warning) log << "warning: " << v.message << "\n";
}

// Gamma_eff through the hierarchy route: prefactor times (delta_rho''/eta)
// sin(alpha); agrees with the closed form in the weak-probe limit.
double gamma_eff_hierarchy(const SimConfig& config) {
    const DerivedParams derived = derive_quantities(config);
    const FourierSolution sol =
        solve_sideband_hierarchy(config.atom, config.drive, config.mirror.omega_m, 1);
    const ModulationResult mod = modulation(sol);
    const double pref = config.optics.k_c * derived.f0 * derived.d * config.atom.gamma_p /
                        (config.mirror.mass * config.mirror.omega_m * config.atom.omega_p);
    return pref * (mod.amplitude / config.drive.eta) * std::sin(mod.phase);
}

struct Axis {
    SweepAxis def;
    std::string header;
};

Axis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ValidationError("--axis '" + text + "': expected section.key=lo:hi:count[:log]");
    Axis ax;
    ax.def.key = text.substr(0, eq);
    ax.header = ax.def.key;
    const std::string spec = text.substr(eq + 1);
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
        const auto colon = spec.find(':', pos);
        parts.push_back(
            spec.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() < 3 || parts.size() > 4)
        throw ValidationError("--axis '" + text + "': expected lo:hi:count[:log]");
    try {
        ax.def.lo = std::stod(parts[0]);
        ax.def.hi = std::stod(parts[1]);
        ax.def.count = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw ValidationError("--axis '" + text + "': bad number");
    }
    if (parts.size() == 4) {
        if (parts[3] == "log")
            ax.def.log_spaced = true;
        else if (parts[3] != "lin")
            throw ValidationError("--axis '" + text + "': spacing must be lin or log");
    }
    return ax;
}

} // namespace

SimConfig load_config_cli(const GlobalOptions& opt) { return build_config(load_doc(opt)); }

int run_steady(const GlobalOptions& opt, std::ostream& log) {
    const SimConfig config = load_config_cli(opt);
    print_warnings(config, log);
    const DerivedParams derived = derive_quantities(config);
    const Mat3 rho = steady_state(config.atom);
    const DressedSpectrum spec = dressed_gaps(config.atom);
    const auto checks = validity_report(config, derived);

    const cplx rho_ge = rho(idx_g, idx_e);
    const cplx kplchi = derived.a_gain * rho_ge;
    std::vector<std::string> warn;
    const double w_exact =
        probe_power(rho_ge.imag(), config.optics, derived, TransmissionForm::exact, &warn);
    const double w_linear =
        probe_power(rho_ge.imag(), config.optics, derived, TransmissionForm::linear, &warn);

    {
        auto os = open_out(opt, "steady.csv");
        os << "quantity,value\n";
        const auto row = [&os](const std::string& k, double v) {
            os << k << "," << fmt17(v) << "\n";
        };
        row("rho_gg", rho(idx_g, idx_g).real());
        row("rho_ss", rho(idx_s, idx_s).real());
        row("rho_ee", rho(idx_e, idx_e).real());
        row("re_rho_ge", rho_ge.real());
        row("im_rho_ge", rho_ge.imag());
        row("re_rho_gs", rho(idx_g, idx_s).real());
        row("im_rho_gs", rho(idx_g, idx_s).imag());
        row("re_rho_se", rho(idx_s, idx_e).real());
        row("im_rho_se", rho(idx_s, idx_e).imag());
        row("optical_depth", derived.d);
        row("a_gain", derived.a_gain);
        row("re_kpl_chi", kplchi.real());
        row("im_kpl_chi", kplchi.imag());
        row("w_p_exact_w", w_exact);
        row("w_p_linear_w", w_linear);
        row("transmission_exact", w_exact / config.optics.w_p0);
        for (int j = 0; j < 3; ++j)
            row("dressed_e" + std::to_string(j) + "_mhz", radps_to_mhz(spec.energies[j]));
        row("dressed_gap1_mhz", radps_to_mhz(spec.gaps[0]));
        row("dressed_gap2_mhz", radps_to_mhz(spec.gaps[1]));
        row("dark_index", spec.dark_index);
    }
    write_resolved_config(opt, config);

    log << "steady state (basis g, s, e)\n";
    log << "  populations: " << fmt6(rho(idx_g, idx_g).real()) << " "
        << fmt6(rho(idx_s, idx_s).real()) << " " << fmt6(rho(idx_e, idx_e).real()) << "\n";
    log << "  rho_ge = " << fmt6(rho_ge.real()) << " + " << fmt6(rho_ge.imag()) << " i\n";
    if (std::abs(rho_ge.imag()) < 1e-12)
        log << "  perfect transparency: Im rho_ge = 0 within numerical zero\n";
    if (config.atom.omega_c == 0.0)
        log << "  two-level medium (Omega_c = 0): resonant absorption Im rho_ge = "
            << fmt6(rho_ge.imag()) << "\n";
    log << "  transmission W_p/W_p0: exact " << fmt6(w_exact / config.optics.w_p0)
        << ", linearized " << fmt6(w_linear / config.optics.w_p0) << "\n";
    log << "  dressed energies/2pi MHz: " << fmt6(radps_to_mhz(spec.energies[0])) << " "
        << fmt6(radps_to_mhz(spec.energies[1])) << " " << fmt6(radps_to_mhz(spec.energies[2]))
        << " (dark index " << spec.dark_index << ")\n";
    for (const auto& c : checks)
        log << "  [" << (c.pass ? "pass" : "warn") << "] " << c.name
            << ": ratio = " << fmt6(c.ratio) << "\n";
    for (const auto& w : warn) log << "warning: " << w << "\n";
    return 0;
}

int run_resonance(const GlobalOptions& opt, std::ostream& log) {
    const SimConfig config = load_config_cli(opt);
    print_warnings(config, log);
    const double omega_m = config.mirror.omega_m;

    const DressedSpectrum at_config = dressed_gaps(config.atom);

    // Detunings where a dark-to-dressed gap matches the mirror frequency,
    // located by bisection on each branch over Delta_c >= 0.
    const auto gap_mismatch = [&](double dc, int branch) {
        AtomDriveParams a = config.atom;
        a.delta_c = dc;
        return dressed_gaps(a).gaps[branch] - omega_m;
    };
    std::vector<double> resonant_dc;
    const double hi = 4.0 * (config.atom.omega_c + omega_m) + 10.0 * config.atom.gamma_p;
    for (int branch = 0; branch < 2; ++branch) {
        const int n = 2000;
        double prev = gap_mismatch(0.0, branch);
        for (int i = 1; i <= n; ++i) {
            const double dc = hi * i / n;
            const double cur = gap_mismatch(dc, branch);
            if ((prev < 0) != (cur < 0)) {
                double a = hi * (i - 1) / n, b = dc;
                const bool left_neg = prev < 0;
                for (int it = 0; it < 80; ++it) {
                    const double m = 0.5 * (a + b);
                    if ((gap_mismatch(m, branch) < 0) == left_neg)
                        a = m;
                    else
                        b = m;
                }
                resonant_dc.push_back(0.5 * (a + b));
            }
            prev = cur;
        }
    }
    std::sort(resonant_dc.begin(), resonant_dc.end());

    {
        auto os = open_out(opt, "resonance.csv");
        os << "delta_c_mhz,gap1_mhz,gap2_mhz\n";
        const int n = 401;
        for (int i = 0; i < n; ++i) {
            const double dc = -hi + 2.0 * hi * i / (n - 1);
            AtomDriveParams a = config.atom;
            a.delta_c = dc;
            const DressedSpectrum s = dressed_gaps(a);
            os << fmt17(radps_to_mhz(dc)) << "," << fmt17(radps_to_mhz(s.gaps[0])) << ","
               << fmt17(radps_to_mhz(s.gaps[1])) << "\n";
        }
    }
    write_resolved_config(opt, config);

    const double dmax = delta_max(config.atom, omega_m);
    const double dapprox = delta_max_approx(config.atom.omega_c, omega_m);
    log << "dressed energies/2pi MHz at config detuning: "
        << fmt6(radps_to_mhz(at_config.energies[0])) << " "
        << fmt6(radps_to_mhz(at_config.energies[1])) << " "
        << fmt6(radps_to_mhz(at_config.energies[2])) << ", dark index " << at_config.dark_index
        << (at_config.overlap_tie ? " (overlap tie, lowest index kept)" : "") << "\n";
    log << "gaps |E_d - E_j|/2pi MHz: " << fmt6(radps_to_mhz(at_config.gaps[0])) << " "
        << fmt6(radps_to_mhz(at_config.gaps[1])) << "\n";
    log << "gap = omega_m resonances at Delta_c/2pi MHz:";
    for (double dc : resonant_dc) log << " " << fmt6(radps_to_mhz(dc));
    log << "\n";
    log << "delta_max formula: " << fmt6(radps_to_mhz(dmax)) << " MHz (signed), approx |.|: "
        << fmt6(radps_to_mhz(dapprox)) << " MHz\n";
    return 0;
}

int run_sidebands(const GlobalOptions& opt, const std::vector<double>& eta_sweep,
                  std::ostream& log) {
    const SimConfig config = load_config_cli(opt);
    print_warnings(config, log);
    const double omega_m = config.mirror.omega_m;
    const double period = two_pi / omega_m;
    const double t_start = config.run.transient_gammap / config.atom.gamma_p;
    const double t_span = t_start + (config.run.lockin_periods + 2) * period;

    const SimTrace trace = integrate_prescribed(config, t_span);
    const LockinResult lk =
        lockin(trace.t, trace.im_ge, omega_m, t_start, config.run.lockin_periods);
    const FourierSolution sol =
        solve_sideband_hierarchy(config.atom, config.drive, omega_m, config.run.truncation_order);
    const ModulationResult mh = modulation(sol);
    const ModulationResult ma =
        modulation_analytic(config.atom, config.drive.eta, omega_m, config.atom.delta_c);

    // Modulations below the lock-in noise floor (transient remnants inside the
    // analysis window, ~7e-5 at the default cut) count as zero: the paths then
    // agree and the phase of an absent signal is not compared.
    const double amp_floor = 1e-4;
    const auto rel = [&](double a, double b) {
        if (std::max(std::abs(a), std::abs(b)) <= amp_floor) return 0.0;
        return std::abs(a - b) / std::max(std::abs(b), 1e-300);
    };
    const auto dphase = [&](double pa, double pb, double aa, double ab) {
        if (std::max(std::abs(aa), std::abs(ab)) <= amp_floor) return 0.0;
        return std::abs(std::remainder(pa - pb, two_pi));
    };
    const double amp_bh = rel(lk.amplitude, mh.amplitude);
    const double amp_ba = rel(lk.amplitude, ma.amplitude);
    const double ph_bh = dphase(lk.phase, mh.phase, lk.amplitude, mh.amplitude);
    const double ph_ba = dphase(lk.phase, ma.phase, lk.amplitude, ma.amplitude);

    {
        auto os = open_out(opt, "sidebands_trace.csv");
        write_trace_csv(trace, os);
    }
    {
        auto os = open_out(opt, "sidebands_compare.csv");
        os << "source,offset,amplitude,phase_rad\n";
        os << "brute_force," << fmt17(lk.offset) << "," << fmt17(lk.amplitude) << ","
           << fmt17(lk.phase) << "\n";
        os << "hierarchy_k" << config.run.truncation_order << "," << fmt17(mh.offset) << ","
           << fmt17(mh.amplitude) << "," << fmt17(mh.phase) << "\n";
        os << "analytic," << fmt17(ma.offset) << "," << fmt17(ma.amplitude) << ","
           << fmt17(ma.phase) << "\n";
    }

    const bool gate_ok = amp_bh <= opt.gate_amp_rel && amp_ba <= opt.gate_amp_rel &&
                         ph_bh <= opt.gate_phase_rad && ph_ba <= opt.gate_phase_rad;

    double sweep_r2 = NAN, sweep_intercept_frac = NAN;
    if (!eta_sweep.empty()) {
        RawDoc doc = load_doc(opt);
        std::vector<double> amps;
        for (double eta : eta_sweep) {
            if (doc.sections.count("drive")) doc.sections["drive"].erase("z0_m");
            doc.set("drive", "eta", fmt17(eta));
            const SimConfig c = build_config(doc);
            const SimTrace tr = integrate_prescribed(c, t_span);
            amps.push_back(
                lockin(tr.t, tr.im_ge, omega_m, t_start, c.run.lockin_periods).amplitude);
        }
        std::vector<double> etas = eta_sweep;
        const LineFit f = fit_line(etas, amps);
        sweep_r2 = f.r2;
        const double ref = f.intercept + f.slope * 0.08;
        sweep_intercept_frac = std::abs(f.intercept) / std::abs(ref);
        auto os = open_out(opt, "sidebands_eta.csv");
        os << "eta,delta_rho\n";
        for (size_t i = 0; i < eta_sweep.size(); ++i)
            os << fmt17(eta_sweep[i]) << "," << fmt17(amps[i]) << "\n";
    }

    {
        auto os = open_out(opt, "sidebands_summary.txt");
        const auto line = [&](const std::string& s) {
            os << s << "\n";
            log << s << "\n";
        };
        line("sideband response comparison (offset, amplitude, phase of Im rho_ge)");
        line("  brute force : " + fmt6(lk.offset) + "  " + fmt6(lk.amplitude) + "  " +
             fmt6(lk.phase));
        line("  hierarchy   : " + fmt6(mh.offset) + "  " + fmt6(mh.amplitude) + "  " +
             fmt6(mh.phase));
        line("  analytic    : " + fmt6(ma.offset) + "  " + fmt6(ma.amplitude) + "  " +
             fmt6(ma.phase));
        line("  rel amp err (bf vs hierarchy): " + fmt6(amp_bh) +
             ", (bf vs analytic): " + fmt6(amp_ba));
        line("  phase err   (bf vs hierarchy): " + fmt6(ph_bh) +
             ", (bf vs analytic): " + fmt6(ph_ba));
        line(std::string("  gate ") + (gate_ok ? "PASS" : "FAIL") + " (amp " +
             fmt6(opt.gate_amp_rel) + ", phase " + fmt6(opt.gate_phase_rad) + " rad)");
        if (!eta_sweep.empty())
            line("  eta sweep R^2 = " + fmt6(sweep_r2) +
                 ", |intercept| / fit(0.08) = " + fmt6(sweep_intercept_frac));
    }
    write_resolved_config(opt, config);
    return gate_ok ? 0 : 3;
}

namespace {

struct MapCell {
    std::vector<double> axis_values;
    std::vector<double> values; // NaN cells emitted as explicit "nan" tokens
};

void write_map_csv(std::ostream& os, const std::vector<Axis>& axes,
                   const std::vector<std::string>& value_headers,
                   const std::vector<MapCell>& cells) {
    for (const auto& ax : axes) os << ax.header << ",";
    for (size_t i = 0; i < value_headers.size(); ++i)
        os << value_headers[i] << (i + 1 < value_headers.size() ? "," : "");
    os << "\n";
    for (const auto& cell : cells) {
        for (double v : cell.axis_values) os << fmt17(v) << ",";
        for (size_t i = 0; i < cell.values.size(); ++i) {
            if (std::isnan(cell.values[i]))
                os << "nan";
            else
                os << fmt17(cell.values[i]);
            if (i + 1 < cell.values.size()) os << ",";
        }
        os << "\n";
    }
}

void write_map_svg(std::ostream& os, const std::vector<Axis>& axes,
                   const std::vector<MapCell>& cells, size_t value_col) {
    const int n0 = axes[0].def.count;
    const int n1 = axes[1].def.count;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : cells) {
        const double v = c.values[value_col];
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const int cell_px = std::max(2, 600 / std::max(n0, n1));
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n1 * cell_px << "\" height=\""
       << n0 * cell_px << "\">\n";
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) {
            const double v = cells[static_cast<size_t>(i) * n1 + j].values[value_col];
            std::string fill = "rgb(128,128,128)";
            if (!std::isnan(v)) {
                const double f = (v - lo) / (hi - lo);
                fill = "rgb(" + std::to_string(static_cast<int>(255 * f)) + ",0," +
                       std::to_string(static_cast<int>(255 * (1.0 - f))) + ")";
            }
            os << "<rect x=\"" << j * cell_px << "\" y=\"" << (n0 - 1 - i) * cell_px
               << "\" width=\"" << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << fill
               << "\"/>\n";
        }
    os << "</svg>\n";
}

} // namespace

int run_map(const GlobalOptions& opt, const MapOptions& map_opt, std::ostream& log) {
    const RawDoc base_doc = load_doc(opt);
    const SimConfig base_config = build_config(base_doc);
    print_warnings(base_config, log);

    if (map_opt.axes.empty()) throw ValidationError("map: at least one --axis is required");
    std::vector<Axis> axes;
    axes.reserve(map_opt.axes.size());
    for (const auto& a : map_opt.axes) axes.push_back(parse_axis(a));
    SweepGrid grid;
    for (const auto& ax : axes) grid.axes.push_back(ax.def);
    if (map_opt.kind == "analytic")
        grid.kind = SweepKind::analytic;
    else if (map_opt.kind == "hierarchy")
        grid.kind = SweepKind::hierarchy;
    else if (map_opt.kind == "coupled")
        grid.kind = SweepKind::coupled;
    else
        throw ValidationError("map: --kind must be analytic | hierarchy | coupled");
    grid.validate();

    bool modulation_map = false;
    for (const auto& ax : axes)
        if (ax.def.key == "atom.delta_c_mhz") modulation_map = true;

    const std::vector<std::string> value_headers =
        modulation_map
            ? std::vector<std::string>{"delta_rho", "alpha_rad", "delta_max_mhz"}
            : std::vector<std::string>{"delta_max_mhz", "gamma_eff_per_s", "abs_gamma_eff_per_s"};

    const std::function<MapCell(size_t)> eval_cell = [&](size_t cell) -> MapCell {
        const auto [i0, i1] = grid.cell_indices(cell);
        RawDoc doc = base_doc;
        MapCell out;
        out.axis_values.push_back(grid.axes[0].value(i0));
        doc.set_path(axes[0].def.key + "=" + fmt17(out.axis_values[0]));
        if (axes.size() > 1) {
            out.axis_values.push_back(grid.axes[1].value(i1));
            doc.set_path(axes[1].def.key + "=" + fmt17(out.axis_values[1]));
        }
        const SimConfig c = build_config(doc);
        const double omega_m = c.mirror.omega_m;
        const double dmax = delta_max(c.atom, omega_m);

        if (modulation_map) {
            ModulationResult mod;
            if (grid.kind == SweepKind::analytic) {
                mod = modulation_analytic(c.atom, c.drive.eta, omega_m, c.atom.delta_c);
            } else if (grid.kind == SweepKind::hierarchy) {
                mod = modulation(
                    solve_sideband_hierarchy(c.atom, c.drive, omega_m, c.run.truncation_order));
            } else {
                const double t_start = c.run.transient_gammap / c.atom.gamma_p;
                const double period = two_pi / omega_m;
                const SimTrace tr =
                    integrate_prescribed(c, t_start + (c.run.lockin_periods + 2) * period);
                const LockinResult lk =
                    lockin(tr.t, tr.im_ge, omega_m, t_start, c.run.lockin_periods);
                mod.offset = lk.offset;
                mod.amplitude = lk.amplitude;
                mod.phase = lk.phase;
            }
            out.values = {mod.amplitude, mod.amplitude > 0.0 ? mod.phase : NAN,
                          radps_to_mhz(dmax)};
            return out;
        }

        // Gamma_eff at Delta_c = Delta_max(omega_m). The atomic response
        // vanishes identically at omega_m = Omega_c/2; those cells carry NaN.
        if (omega_m == 0.5 * c.atom.omega_c) {
            out.values = {radps_to_mhz(dmax), NAN, NAN};
            return out;
        }
        SimConfig cc = c;
        cc.atom.delta_c = dmax;
        double g;
        if (grid.kind == SweepKind::analytic) {
            g = gamma_eff(cc.atom, omega_m, cc.mirror, cc.optics);
        } else if (grid.kind == SweepKind::hierarchy) {
            g = gamma_eff_hierarchy(cc);
        } else {
            const double period = two_pi / omega_m;
            const SimTrace tr = integrate_feedback(cc, cc.run.periods * period);
            const EnergySeries es = energy_per_period(tr, cc.mirror);
            std::vector<double> ft, fe;
            const double cut = cc.run.transient_gammap / cc.atom.gamma_p + 2.0 * period;
            for (size_t i = 0; i < es.t.size(); ++i)
                if (es.t[i] >= cut) {
                    ft.push_back(es.t[i]);
                    fe.push_back(es.energy[i]);
                }
            g = fit_rate(ft, fe).rate / tr.meta.wp0_scale;
        }
        out.values = {radps_to_mhz(dmax), g, std::abs(g)};
        return out;
    };

    const std::vector<MapCell> cells = sweep_run<MapCell>(grid.cell_count(), opt.jobs, eval_cell);

    {
        auto os = open_out(opt, "map.csv");
        write_map_csv(os, axes, value_headers, cells);
    }
    if (map_opt.svg) {
        if (axes.size() == 2) {
            auto os = open_out(opt, "map.svg");
            write_map_svg(os, axes, cells, modulation_map ? 0 : 1);
        } else {
            log << "warning: --svg needs a 2-axis grid, skipped\n";
        }
    }

    if (!map_opt.cuts_mhz.empty()) {
        if (!modulation_map || axes.size() != 2 || axes[0].def.key != "mirror.omega_m_mhz" ||
            axes[1].def.key != "atom.delta_c_mhz")
            throw ValidationError("map: --cuts needs axes mirror.omega_m_mhz x atom.delta_c_mhz");
        for (double f : map_opt.cuts_mhz) {
            std::vector<MapCell> cut_cells(static_cast<size_t>(axes[1].def.count));
            for (int j = 0; j < axes[1].def.count; ++j) {
                RawDoc doc = base_doc;
                doc.set_path("mirror.omega_m_mhz=" + fmt17(f));
                const double dc = grid.axes[1].value(j);
                doc.set_path("atom.delta_c_mhz=" + fmt17(dc));
                const SimConfig c = build_config(doc);
                const ModulationResult mod =
                    grid.kind == SweepKind::hierarchy
                        ? modulation(solve_sideband_hierarchy(c.atom, c.drive, c.mirror.omega_m,
                                                              c.run.truncation_order))
                        : modulation_analytic(c.atom, c.drive.eta, c.mirror.omega_m,
                                              c.atom.delta_c);
                MapCell cell;
                cell.axis_values = {dc};
                cell.values = {mod.amplitude, mod.amplitude > 0.0 ? mod.phase : NAN,
                               radps_to_mhz(delta_max(c.atom, c.mirror.omega_m))};
                cut_cells[static_cast<size_t>(j)] = cell;
            }
            char name[64];
            std::snprintf(name, sizeof name, "map_cut_%gmhz.csv", f);
            auto os = open_out(opt, name);
            const std::vector<Axis> cut_axes = {axes[1]};
            write_map_csv(os, cut_axes, value_headers, cut_cells);
        }
    }

    size_t nan_count = 0;
    for (const auto& c : cells)
        for (double v : c.values)
            if (std::isnan(v)) ++nan_count;

    {
        auto os = open_out(opt, "map_summary.txt");
        const auto line = [&](const std::string& s) {
            os << s << "\n";
            log << s << "\n";
        };
        line("map kind: " + map_opt.kind + (modulation_map ? " (modulation)" : " (gamma_eff)"));
        std::string shape;
        for (const auto& ax : axes)
            shape += (shape.empty() ? "" : " x ") + std::to_string(ax.def.count);
        line("grid: " + shape + " = " + std::to_string(cells.size()) +
             " cells, nan values: " + std::to_string(nan_count));
        if (nan_count > 0)
            line("  nan cells sit at omega_m = Omega_c/2, where the atomic response vanishes");
        for (size_t k = 0; k < value_headers.size(); ++k) {
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& c : cells) {
                if (std::isnan(c.values[k])) continue;
                lo = std::min(lo, c.values[k]);
                hi = std::max(hi, c.values[k]);
            }
            line("  " + value_headers[k] + ": min " + fmt6(lo) + ", max " + fmt6(hi));
        }
    }
    write_resolved_config(opt, base_config);
    return 0;
}

int run_coupled(const GlobalOptions& opt, std::ostream& log) {
    const SimConfig config = load_config_cli(opt);
    print_warnings(config, log);
    const double omega_m = config.mirror.omega_m;
    const double period = two_pi / omega_m;
    const double t_span = config.run.periods * period;

    const SimTrace trace = integrate_feedback(config, t_span);
    const EnergySeries series = energy_per_period(trace, config.mirror);

    const double cut = config.run.transient_gammap / config.atom.gamma_p + 2.0 * period;
    std::vector<double> ft, fe;
    for (size_t i = 0; i < series.t.size(); ++i)
        if (series.t[i] >= cut) {
            ft.push_back(series.t[i]);
            fe.push_back(series.energy[i]);
        }
    if (ft.size() < 8)
        throw ValidationError(
            "coupled: too few post-transient periods for a rate fit; increase run.periods");
    const RateFit fit = fit_rate(ft, fe);

    const double gamma_pred = (config.run.feedback ? 1.0 : 0.0) * trace.meta.wp0_scale *
                              gamma_eff(config.atom, omega_m, config.mirror, config.optics);
    if (std::abs(gamma_pred) > 0.1 * omega_m)
        log << "warning: |Gamma_eff| = " << fmt6(std::abs(gamma_pred))
            << " exceeds 0.1 omega_m; the period-averaged envelope model is outside its regime\n";

    const double noise_floor = 1e-6 * omega_m;
    std::string verdict = "neutral";
    if (std::abs(fit.rate) >= noise_floor) verdict = fit.rate > 0.0 ? "damped" : "amplified";
    const double ratio = gamma_pred != 0.0 ? fit.rate / gamma_pred : NAN;

    OpticsParams run_optics = config.optics;
    run_optics.w_p0 *= trace.meta.wp0_scale;
    const double z_eq = equilibrium_shift(run_optics, derive_quantities(config), config.mirror,
                                          trace.meta.rho_dc);

    {
        auto os = open_out(opt, "coupled_energy.csv");
        os << "t_s,energy_j,energy_hbar_omega,z_bar_m\n";
        for (size_t i = 0; i < series.t.size(); ++i) {
            const double e = series.energy[i];
            const double zbar = std::sqrt(2.0 * e / (config.mirror.mass * omega_m * omega_m));
            os << fmt17(series.t[i]) << "," << fmt17(e) << "," << fmt17(e / (hbar * omega_m))
               << "," << fmt17(zbar) << "\n";
        }
    }
    {
        auto os = open_out(opt, "coupled_trace.csv");
        write_trace_csv(trace, os);
    }
    {
        auto os = open_out(opt, "coupled_summary.txt");
        const auto line = [&](const std::string& s) {
            os << s << "\n";
            log << s << "\n";
        };
        line("coupled mirror-medium run: " + fmt6(config.run.periods) +
             " periods, wp0_scale = " + fmt6(trace.meta.wp0_scale));
        line("  Gamma_fit = " + fmt6(fit.rate) + " 1/s (stderr " + fmt6(fit.stderr_rate) +
             ", R^2 " + fmt6(fit.r2) + ")");
        line("  Gamma_eff prediction = " + fmt6(gamma_pred) + " 1/s");
        line("  agreement ratio Gamma_fit/Gamma_eff = " + fmt6(ratio));
        line("  verdict: " + verdict);
        line("  equilibrium shift z_eq = " + fmt6(z_eq) + " m (z is measured from this point)");
        line("  DC coherence reference rho''_dc = " + fmt6(trace.meta.rho_dc));
    }
    write_resolved_config(opt, config);
    return 0;
}

} // namespace eitmech::cli
