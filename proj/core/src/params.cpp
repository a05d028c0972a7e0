#include "eitmech/params.hpp"
#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>

namespace eitmech {

namespace {

enum class Kind { number, word };

struct KeyDef {
    const char* section;
    const char* key;
    Kind kind;
    bool required;
    const char* default_text; // nullptr: optional with no direct default
    const char* doc;
};

// The documented key grammar. Unit suffixes: _mhz (linear MHz, converted to
// rad/s with a factor 2*pi*1e6), _kg, _m, _w, _per_m, _per_m3; plain keys are
// dimensionless.
const KeyDef kKeys[] = {
    {"atom", "omega_p_mhz", Kind::number, true, nullptr, "probe Rabi frequency / 2pi"},
    {"atom", "omega_c_mhz", Kind::number, true, nullptr, "control Rabi frequency / 2pi"},
    {"atom", "delta_c_mhz", Kind::number, true, nullptr, "control detuning / 2pi (signed)"},
    {"atom", "gamma_p_mhz", Kind::number, true, nullptr, "decay rate |e>->|g> / 2pi"},
    {"mirror", "mass_kg", Kind::number, true, nullptr, "mirror mass"},
    {"mirror", "omega_m_mhz", Kind::number, true, nullptr, "mirror frequency / 2pi"},
    {"mirror", "intrinsic_damping_per_s", Kind::number, false, "0",
     "viscous clamping-loss rate (disabled by default)"},
    {"optics", "lambda_p_m", Kind::number, false, "794.98e-9", "probe wavelength (Rb-87 D1 default)"},
    {"optics", "lambda_c_m", Kind::number, false, nullptr, "control wavelength (default: lambda_p_m)"},
    {"optics", "k_p_per_m", Kind::number, false, nullptr, "probe wavenumber (overrides lambda_p_m)"},
    {"optics", "k_c_per_m", Kind::number, false, nullptr, "control wavenumber (overrides lambda_c_m)"},
    {"optics", "density_per_m3", Kind::number, false, "3.5e18", "atomic number density"},
    {"optics", "length_m", Kind::number, false, "242e-6", "medium length"},
    {"optics", "w_p0_w", Kind::number, false, "2.6e-8", "incoming probe power"},
    {"optics", "w_c_w", Kind::number, false, "3.2e-3", "control power at the mirror"},
    {"drive", "z0_m", Kind::number, false, "1.0e-8", "mirror oscillation amplitude"},
    {"drive", "eta", Kind::number, false, nullptr, "sideband strength k_c*z0 (alternative to z0_m)"},
    {"drive", "mode", Kind::word, false, "linearized", "control factor: linearized | exact-exponential"},
    {"run", "rel_tol", Kind::number, false, "1e-8", "integrator relative tolerance"},
    {"run", "abs_tol", Kind::number, false, "1e-12", "integrator absolute tolerance"},
    {"run", "samples_per_period", Kind::number, false, "64", "trace samples per mirror period"},
    {"run", "transient_gammap", Kind::number, false, "15.0", "analysis window start, units of 1/Gamma_p"},
    {"run", "lockin_periods", Kind::number, false, "10", "lock-in window length in mirror periods"},
    {"run", "truncation_order", Kind::number, false, "1", "sideband hierarchy order K (1..4)"},
    {"run", "periods", Kind::number, false, "200", "coupled-run span in mirror periods"},
    {"run", "wp0_scale", Kind::word, false, "1", "probe power scaling for coupled runs, number or 'auto'"},
    {"run", "feedback", Kind::word, false, "true", "radiation-pressure feedback on/off"},
};

const KeyDef* find_key(const std::string& section, const std::string& key) {
    for (const auto& def : kKeys)
        if (section == def.section && key == def.key) return &def;
    return nullptr;
}

std::string strip_unit_suffix(std::string key) {
    for (const char* suffix : {"_mhz", "_kg", "_per_m3", "_per_m", "_m", "_w"}) {
        const size_t n = std::strlen(suffix);
        if (key.size() > n && key.compare(key.size() - n, n, suffix) == 0)
            return key.substr(0, key.size() - n);
    }
    return key;
}

[[noreturn]] void fail_unknown_key(const std::string& section, const std::string& key, int line) {
    const std::string stem = strip_unit_suffix(key);
    for (const auto& def : kKeys) {
        if (section != def.section) continue;
        if (strip_unit_suffix(def.key) == stem)
            throw ValidationError("config key " + section + "." + key + " (line " +
                                  std::to_string(line) + "): unit suffix mismatch, expected '" +
                                  def.key + "'");
    }
    throw ValidationError("unknown config key " + section + "." + key + " (line " +
                          std::to_string(line) + ")");
}

std::optional<double> parse_number(const std::string& text) {
    const char* s = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') return std::nullopt;
    return v;
}

std::string where(const RawEntry& e) {
    return e.line > 0 ? "line " + std::to_string(e.line) : "override";
}

class Resolver {
public:
    explicit Resolver(const RawDoc& doc) : doc_(doc) {
        for (const auto& [section, keys] : doc.sections) {
            bool known_section = false;
            for (const auto& def : kKeys)
                if (section == def.section) { known_section = true; break; }
            if (!known_section)
                throw ValidationError("unknown config section [" + section + "]");
            for (const auto& [key, entry] : keys)
                if (!find_key(section, key)) fail_unknown_key(section, key, entry.line);
        }
        for (const auto& def : kKeys)
            if (def.required && !doc.has(def.section, def.key))
                throw ValidationError(std::string("missing required config key ") + def.section +
                                      "." + def.key);
    }

    bool present(const char* section, const char* key) const { return doc_.has(section, key); }

    double number(const char* section, const char* key) const {
        const RawEntry* e = doc_.find(section, key);
        std::string text;
        if (e) {
            text = e->value;
        } else {
            const KeyDef* def = find_key(section, key);
            if (!def || !def->default_text)
                throw ValidationError(std::string("missing config key ") + section + "." + key);
            text = def->default_text;
        }
        const auto v = parse_number(text);
        if (!v)
            throw ValidationError(std::string("non-numeric value '") + text + "' for " + section +
                                  "." + key + (e ? " (" + where(*e) + ")" : ""));
        return *v;
    }

    int integer(const char* section, const char* key) const {
        const double v = number(section, key);
        if (std::abs(v - std::round(v)) > 1e-9)
            throw ValidationError(std::string(section) + "." + key + " must be an integer");
        return static_cast<int>(std::llround(v));
    }

    std::string word(const char* section, const char* key) const {
        const RawEntry* e = doc_.find(section, key);
        if (e) return e->value;
        const KeyDef* def = find_key(section, key);
        return def && def->default_text ? def->default_text : "";
    }

private:
    const RawDoc& doc_;
};

bool parse_bool(const std::string& text, const char* keypath) {
    if (text == "true" || text == "on" || text == "1") return true;
    if (text == "false" || text == "off" || text == "0") return false;
    throw ValidationError(std::string(keypath) + ": expected true/false, got '" + text + "'");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Emit the MHz value whose conversion back to rad/s reproduces `radps`
// bit-for-bit. The naive quotient can land one ulp off; for any value that was
// itself produced by mhz_to_radps an exact preimage sits within one ulp.
std::string render_mhz(double radps) {
    double f = radps_to_mhz(radps);
    if (mhz_to_radps(f) != radps) {
        for (const double cand : {std::nextafter(f, HUGE_VAL), std::nextafter(f, -HUGE_VAL)}) {
            if (mhz_to_radps(cand) == radps) { f = cand; break; }
        }
    }
    return fmt17(f);
}

} // namespace

SimConfig build_config(const RawDoc& doc) {
    Resolver r(doc);
    SimConfig c;

    c.atom.omega_p = mhz_to_radps(r.number("atom", "omega_p_mhz"));
    c.atom.omega_c = mhz_to_radps(r.number("atom", "omega_c_mhz"));
    c.atom.delta_c = mhz_to_radps(r.number("atom", "delta_c_mhz"));
    c.atom.gamma_p = mhz_to_radps(r.number("atom", "gamma_p_mhz"));

    c.mirror.mass = r.number("mirror", "mass_kg");
    c.mirror.omega_m = mhz_to_radps(r.number("mirror", "omega_m_mhz"));
    c.mirror.intrinsic_damping = r.number("mirror", "intrinsic_damping_per_s");

    if (r.present("optics", "k_p_per_m") && r.present("optics", "lambda_p_m"))
        throw ValidationError("optics: specify either k_p_per_m or lambda_p_m, not both");
    if (r.present("optics", "k_c_per_m") && r.present("optics", "lambda_c_m"))
        throw ValidationError("optics: specify either k_c_per_m or lambda_c_m, not both");
    c.optics.k_p = r.present("optics", "k_p_per_m") ? r.number("optics", "k_p_per_m")
                                                    : two_pi / r.number("optics", "lambda_p_m");
    if (r.present("optics", "k_c_per_m"))
        c.optics.k_c = r.number("optics", "k_c_per_m");
    else if (r.present("optics", "lambda_c_m"))
        c.optics.k_c = two_pi / r.number("optics", "lambda_c_m");
    else
        c.optics.k_c = c.optics.k_p;
    c.optics.density = r.number("optics", "density_per_m3");
    c.optics.length = r.number("optics", "length_m");
    c.optics.w_p0 = r.number("optics", "w_p0_w");
    c.optics.w_c = r.number("optics", "w_c_w");

    // z0 is primary; eta is always recomputed as k_c*z0 so the invariant holds
    // bit-for-bit on every path.
    if (r.present("drive", "eta") && r.present("drive", "z0_m")) {
        const double eta = r.number("drive", "eta");
        const double z0 = r.number("drive", "z0_m");
        const double implied = c.optics.k_c * z0;
        if (std::abs(eta - implied) > 1e-9 * std::max(std::abs(eta), std::abs(implied)))
            throw ValidationError("drive: eta and z0_m are inconsistent (eta = " + fmt17(eta) +
                                  ", k_c*z0 = " + fmt17(implied) + ")");
        c.drive.z0 = z0;
    } else if (r.present("drive", "eta")) {
        c.drive.z0 = r.number("drive", "eta") / c.optics.k_c;
    } else {
        c.drive.z0 = r.number("drive", "z0_m");
    }
    c.drive.eta = c.optics.k_c * c.drive.z0;
    const std::string mode = r.word("drive", "mode");
    if (mode == "linearized")
        c.drive.mode = ControlFactorMode::linearized;
    else if (mode == "exact-exponential" || mode == "exact_exponential")
        c.drive.mode = ControlFactorMode::exact_exponential;
    else
        throw ValidationError("drive.mode: expected linearized | exact-exponential, got '" + mode +
                              "'");

    c.run.rel_tol = r.number("run", "rel_tol");
    c.run.abs_tol = r.number("run", "abs_tol");
    c.run.samples_per_period = r.integer("run", "samples_per_period");
    c.run.transient_gammap = r.number("run", "transient_gammap");
    c.run.lockin_periods = r.integer("run", "lockin_periods");
    c.run.truncation_order = r.integer("run", "truncation_order");
    c.run.periods = r.number("run", "periods");
    const std::string scale = r.word("run", "wp0_scale");
    if (scale == "auto") {
        c.run.wp0_scale_auto = true;
        c.run.wp0_scale = 1.0;
    } else {
        const auto v = parse_number(scale);
        if (!v) throw ValidationError("run.wp0_scale: expected a number or 'auto', got '" + scale + "'");
        c.run.wp0_scale = *v;
    }
    c.run.feedback = parse_bool(r.word("run", "feedback"), "run.feedback");

    // Hard invariants are load failures; warnings are left to validate().
    std::string errors;
    for (const auto& v : validate(c))
        if (v.severity == Violation::Severity::error) errors += (errors.empty() ? "" : "; ") + v.message;
    if (!errors.empty()) throw ValidationError(errors);
    return c;
}

SimConfig load_config(const std::string& text) { return build_config(parse_document(text)); }

std::vector<Violation> validate(const SimConfig& c) {
    std::vector<Violation> out;
    auto error = [&](const std::string& m) { out.push_back({Violation::Severity::error, m}); };
    auto warn = [&](const std::string& m) { out.push_back({Violation::Severity::warning, m}); };

    if (!(c.atom.gamma_p > 0.0)) error("gamma_p must be positive");
    if (c.atom.omega_p < 0.0) error("omega_p must be nonnegative");
    if (c.atom.omega_c < 0.0) error("omega_c must be nonnegative");
    if (!(c.mirror.mass > 0.0)) error("mass must be positive");
    if (!(c.mirror.omega_m > 0.0)) error("omega_m must be positive");
    if (c.mirror.intrinsic_damping < 0.0) error("intrinsic_damping must be nonnegative");
    if (!(c.optics.k_p > 0.0)) error("k_p must be positive");
    if (!(c.optics.k_c > 0.0)) error("k_c must be positive");
    if (!(c.optics.density > 0.0)) error("density must be positive");
    if (!(c.optics.length > 0.0)) error("length must be positive");
    if (!(c.optics.w_p0 > 0.0)) error("w_p0 must be positive");
    if (!(c.optics.w_c > 0.0)) error("w_c must be positive");
    if (c.drive.z0 < 0.0) error("z0 must be nonnegative");
    if (!(c.run.rel_tol > 0.0) || !(c.run.abs_tol > 0.0)) error("tolerances must be positive");
    if (c.run.samples_per_period < 1) error("samples_per_period must be >= 1");
    if (c.run.lockin_periods < 1) error("lockin_periods must be >= 1");
    if (c.run.truncation_order < 1 || c.run.truncation_order > 4)
        error("truncation_order must be in 1..4");
    if (!(c.run.periods > 0.0)) error("periods must be positive");
    if (!(c.run.wp0_scale > 0.0)) error("wp0_scale must be positive");

    // Soft operating-regime conditions: reported, never fatal.
    if (c.atom.omega_c <= 0.0 ? c.atom.omega_p > 0.0
                              : c.atom.omega_p >= 0.1 * c.atom.omega_c)
        warn("EIT condition Omega_p << Omega_c violated (Omega_p/Omega_c = " +
             std::to_string(c.atom.omega_c > 0 ? c.atom.omega_p / c.atom.omega_c : INFINITY) + ")");
    const double retardation = c.optics.length * c.mirror.omega_m / speed_of_light;
    if (retardation >= 0.1)
        warn("retardation condition L << c/omega_m violated (L/(c/omega_m) = " +
             std::to_string(retardation) + ")");
    if (c.drive.mode == ControlFactorMode::linearized && c.drive.eta > 0.3)
        warn("linearized control factor used at eta = " + std::to_string(c.drive.eta) +
             " > 0.3; consider mode = exact-exponential");
    return out;
}

DerivedParams derive_quantities(const SimConfig& c) {
    if (c.atom.omega_p == 0.0)
        throw ValidationError("A undefined at zero probe Rabi frequency");
    DerivedParams d;
    d.d = 6.0 * pi * c.optics.density * c.optics.length / (c.optics.k_p * c.optics.k_p);
    d.a_gain = d.d * c.atom.gamma_p / c.atom.omega_p;
    d.f0 = 2.0 * c.optics.w_p0 / speed_of_light;
    d.eta = c.drive.eta;
    d.omega_p_t = c.atom.omega_p / c.atom.gamma_p;
    d.omega_c_t = c.atom.omega_c / c.atom.gamma_p;
    d.delta_c_t = c.atom.delta_c / c.atom.gamma_p;
    d.omega_m_t = c.mirror.omega_m / c.atom.gamma_p;
    return d;
}

std::string render_config(const SimConfig& c) {
    std::ostringstream os;
    os << "[atom]\n";
    os << "omega_p_mhz = " << render_mhz(c.atom.omega_p) << "\n";
    os << "omega_c_mhz = " << render_mhz(c.atom.omega_c) << "\n";
    os << "delta_c_mhz = " << render_mhz(c.atom.delta_c) << "\n";
    os << "gamma_p_mhz = " << render_mhz(c.atom.gamma_p) << "\n";
    os << "\n[mirror]\n";
    os << "mass_kg = " << fmt17(c.mirror.mass) << "\n";
    os << "omega_m_mhz = " << render_mhz(c.mirror.omega_m) << "\n";
    os << "intrinsic_damping_per_s = " << fmt17(c.mirror.intrinsic_damping) << "\n";
    os << "\n[optics]\n";
    os << "k_p_per_m = " << fmt17(c.optics.k_p) << "\n";
    os << "k_c_per_m = " << fmt17(c.optics.k_c) << "\n";
    os << "density_per_m3 = " << fmt17(c.optics.density) << "\n";
    os << "length_m = " << fmt17(c.optics.length) << "\n";
    os << "w_p0_w = " << fmt17(c.optics.w_p0) << "\n";
    os << "w_c_w = " << fmt17(c.optics.w_c) << "\n";
    os << "\n[drive]\n";
    os << "z0_m = " << fmt17(c.drive.z0) << "\n";
    os << "mode = "
       << (c.drive.mode == ControlFactorMode::linearized ? "linearized" : "exact-exponential")
       << "\n";
    os << "\n[run]\n";
    os << "rel_tol = " << fmt17(c.run.rel_tol) << "\n";
    os << "abs_tol = " << fmt17(c.run.abs_tol) << "\n";
    os << "samples_per_period = " << c.run.samples_per_period << "\n";
    os << "transient_gammap = " << fmt17(c.run.transient_gammap) << "\n";
    os << "lockin_periods = " << c.run.lockin_periods << "\n";
    os << "truncation_order = " << c.run.truncation_order << "\n";
    os << "periods = " << fmt17(c.run.periods) << "\n";
    os << "wp0_scale = " << (c.run.wp0_scale_auto ? std::string("auto") : fmt17(c.run.wp0_scale))
       << "\n";
    os << "feedback = " << (c.run.feedback ? "true" : "false") << "\n";
    return os.str();
}

std::string config_key_reference() {
    std::ostringstream os;
    for (const auto& def : kKeys) {
        os << def.section << "." << def.key;
        if (def.required)
            os << " (required)";
        else if (def.default_text)
            os << " (default " << def.default_text << ")";
        os << " - " << def.doc << "\n";
    }
    return os.str();
}

} // namespace eitmech
