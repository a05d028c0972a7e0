#include "cli_commands.hpp"

#include "eitmech/errors.hpp"
#include "eitmech/params.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eitmech: coupled dynamics of a nano-mirror and a Lambda-type EIT medium"};
    app.require_subcommand(0, 1);
    app.fallthrough(); // global flags may follow the subcommand

    eitmech::cli::GlobalOptions opt;
    std::string gate_text;
    app.add_option("--config", opt.config_path, "config file (INI sections, see --keys)");
    app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    app.add_option("--override", opt.overrides, "section.key=value, repeatable");
    app.add_option("--jobs", opt.jobs, "worker threads for sweeps")->capture_default_str();
    app.add_option("--gate", gate_text, "sidebands agreement gate AMP_REL,PHASE_RAD");
    bool show_keys = false;
    app.add_flag("--keys", show_keys, "print the config key reference and exit");

    auto* steady = app.add_subcommand("steady", "unmodulated steady state, transparency, gaps");
    auto* sidebands = app.add_subcommand(
        "sidebands", "prescribed-mirror response: brute force vs hierarchy vs analytic");
    std::string eta_sweep_text;
    sidebands->add_option("--eta-sweep", eta_sweep_text,
                          "comma list of eta values for a linearity sweep");
    auto* map = app.add_subcommand("map", "parameter maps (modulation or Gamma_eff) as CSV");
    eitmech::cli::MapOptions map_opt;
    map->add_option("--axis", map_opt.axes, "section.key=lo:hi:count[:log], up to 2")
        ->expected(-1);
    map->add_option("--kind", map_opt.kind, "analytic | hierarchy | coupled")
        ->capture_default_str();
    std::string cuts_text;
    map->add_option("--cuts", cuts_text, "comma list of omega_m/2pi MHz for 1-D cut exports");
    map->add_flag("--svg", map_opt.svg, "also emit a simple SVG heatmap");
    auto* coupled = app.add_subcommand("coupled", "feedback run: energy envelope and rate fit");
    auto* resonance = app.add_subcommand("resonance", "dressed-state gaps and resonant detunings");

    CLI11_PARSE(app, argc, argv);

    if (show_keys) {
        std::cout << eitmech::config_key_reference();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << "a subcommand is required (steady, sidebands, map, coupled, resonance)\n";
        return 1;
    }
    if (!gate_text.empty()) {
        const auto gates = parse_double_list(gate_text);
        if (gates.size() != 2) {
            std::cerr << "--gate expects AMP_REL,PHASE_RAD\n";
            return 1;
        }
        opt.gate_amp_rel = gates[0];
        opt.gate_phase_rad = gates[1];
    }

    try {
        if (steady->parsed()) return eitmech::cli::run_steady(opt, std::cout);
        if (sidebands->parsed())
            return eitmech::cli::run_sidebands(opt, parse_double_list(eta_sweep_text), std::cout);
        if (map->parsed()) {
            map_opt.cuts_mhz = parse_double_list(cuts_text);
            return eitmech::cli::run_map(opt, map_opt, std::cout);
        }
        if (coupled->parsed()) return eitmech::cli::run_coupled(opt, std::cout);
        if (resonance->parsed()) return eitmech::cli::run_resonance(opt, std::cout);
    } catch (const eitmech::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const eitmech::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
