#pragma once

#include "eitmech/params.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace eitmech::cli {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides; // "section.key=value"
    int jobs = 1;
    double gate_amp_rel = 0.02;
    double gate_phase_rad = 0.05;
};

struct MapOptions {
    std::vector<std::string> axes;  // "section.key=lo:hi:count[:log]"
    std::string kind = "analytic";  // analytic | hierarchy | coupled
    std::vector<double> cuts_mhz;   // 1-D cut exports at these omega_m values
    bool svg = false;
};

// Exit codes: 0 ok, 1 validation error, 2 numerical failure, 3 gate failure.
int run_steady(const GlobalOptions& opt, std::ostream& log);
int run_resonance(const GlobalOptions& opt, std::ostream& log);
int run_sidebands(const GlobalOptions& opt, const std::vector<double>& eta_sweep,
                  std::ostream& log);
int run_map(const GlobalOptions& opt, const MapOptions& map_opt, std::ostream& log);
int run_coupled(const GlobalOptions& opt, std::ostream& log);

// Config file + --override applications; shared by every subcommand.
SimConfig load_config_cli(const GlobalOptions& opt);

} // namespace eitmech::cli
