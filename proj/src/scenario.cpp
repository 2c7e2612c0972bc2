#include "ionsbm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "ionsbm/errors.hpp"
#include "ionsbm/units.hpp"

namespace ionsbm::scenario {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error("scenario/bad_field", path + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!ok.count(it.key())) {
            fail(path + "." + it.key(), "unknown field");
        }
    }
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected a boolean");
    return v.get<bool>();
}

double opt_double(const json& obj, const std::string& path, const char* key, double fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : as_double(*it, path + "." + key);
}

int opt_int(const json& obj, const std::string& path, const char* key, int fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : as_int(*it, path + "." + key);
}

void parse_chain(const json& doc, Scenario& s) {
    const json& c = member(doc, "scenario", "chain");
    check_keys(c, "chain",
               {"ion_count", "transverse_freq_khz", "axial_freq_khz", "target_mean_spacing_um",
                "ion_mass_amu"});
    s.trap.ion_count = as_int(member(c, "chain", "ion_count"), "chain.ion_count");
    if (s.trap.ion_count < 2) fail("chain.ion_count", "need at least two ions");
    s.trap.transverse_freq =
        units::khz_to_rad_per_ms(as_double(member(c, "chain", "transverse_freq_khz"),
                                           "chain.transverse_freq_khz"));
    if (s.trap.transverse_freq <= 0.0) fail("chain.transverse_freq_khz", "must be positive");
    const bool has_axial = c.contains("axial_freq_khz");
    const bool has_spacing = c.contains("target_mean_spacing_um");
    if (has_axial == has_spacing) {
        fail("chain", "give exactly one of axial_freq_khz / target_mean_spacing_um");
    }
    if (has_axial) {
        const double wz = units::khz_to_rad_per_ms(as_double(c["axial_freq_khz"],
                                                             "chain.axial_freq_khz"));
        if (wz <= 0.0) fail("chain.axial_freq_khz", "must be positive");
        s.trap.axial_freq = wz;
    } else {
        const double d = as_double(c["target_mean_spacing_um"], "chain.target_mean_spacing_um");
        if (d <= 0.0) fail("chain.target_mean_spacing_um", "must be positive");
        s.trap.target_mean_spacing = d;
    }
    s.trap.ion_mass_amu = opt_double(c, "chain", "ion_mass_amu", 171.0);
    if (s.trap.ion_mass_amu <= 0.0) fail("chain.ion_mass_amu", "must be positive");
}

void parse_coupling(const json& doc, Scenario& s) {
    const json& c = member(doc, "scenario", "coupling");
    check_keys(c, "coupling", {"target_ion", "g_com_khz"});
    const json& ion = member(c, "coupling", "target_ion");
    if (ion.is_string()) {
        const std::string which = ion.get<std::string>();
        if (which == "edge") {
            s.target_ion = 0;
        } else if (which == "center") {
            s.target_ion = (s.trap.ion_count - 1) / 2;
        } else {
            fail("coupling.target_ion", "expected \"edge\", \"center\", or an index");
        }
    } else {
        s.target_ion = as_int(ion, "coupling.target_ion");
        if (s.target_ion < 0 || s.target_ion >= s.trap.ion_count) {
            fail("coupling.target_ion", "index out of range");
        }
    }
    s.com_sideband_rate =
        units::khz_to_rad_per_ms(as_double(member(c, "coupling", "g_com_khz"),
                                           "coupling.g_com_khz"));
    if (s.com_sideband_rate <= 0.0) fail("coupling.g_com_khz", "must be positive");
}

void parse_drive(const json& doc, Scenario& s) {
    const json& d = member(doc, "scenario", "drive");
    check_keys(d, "drive", {"spin_detuning_khz", "tones"});
    s.spin_detuning = units::khz_to_rad_per_ms(
        as_double(member(d, "drive", "spin_detuning_khz"), "drive.spin_detuning_khz"));
    const json& tones = member(d, "drive", "tones");
    if (!tones.is_array() || tones.empty()) fail("drive.tones", "expected a non-empty array");
    for (std::size_t j = 0; j < tones.size(); ++j) {
        const std::string path = "drive.tones[" + std::to_string(j) + "]";
        check_keys(tones[j], path, {"offset_khz", "phase_rad", "weight"});
        Tone tone;
        tone.offset = units::khz_to_rad_per_ms(
            as_double(member(tones[j], path, "offset_khz"), path + ".offset_khz"));
        tone.phase = opt_double(tones[j], path, "phase_rad", 0.0);
        tone.weight = opt_double(tones[j], path, "weight", 1.0);
        if (tone.weight <= 0.0) fail(path + ".weight", "must be positive");
        s.tones.push_back(tone);
    }
}

void parse_thermal(const json& doc, Scenario& s) {
    const json& t = member(doc, "scenario", "thermal");
    check_keys(t, "thermal", {"nbar", "trials", "seed"});
    const json& nbar = member(t, "thermal", "nbar");
    const int n = s.trap.ion_count;
    s.nbar.resize(n);
    if (nbar.is_array()) {
        if (static_cast<int>(nbar.size()) != n) {
            fail("thermal.nbar", "array length must equal ion_count");
        }
        for (int k = 0; k < n; ++k) {
            s.nbar[k] = as_double(nbar[k], "thermal.nbar[" + std::to_string(k) + "]");
        }
    } else if (nbar.is_object() && nbar.contains("all")) {
        check_keys(nbar, "thermal.nbar", {"all"});
        s.nbar.setConstant(as_double(nbar["all"], "thermal.nbar.all"));
    } else if (nbar.is_object()) {
        check_keys(nbar, "thermal.nbar", {"com", "tilt", "rest"});
        const double com = as_double(member(nbar, "thermal.nbar", "com"), "thermal.nbar.com");
        const double tilt = as_double(member(nbar, "thermal.nbar", "tilt"), "thermal.nbar.tilt");
        const double rest = as_double(member(nbar, "thermal.nbar", "rest"), "thermal.nbar.rest");
        s.nbar.setConstant(rest);
        s.nbar[0] = com;
        if (n > 1) s.nbar[1] = tilt;
    } else {
        fail("thermal.nbar", "expected an array or an object");
    }
    for (int k = 0; k < n; ++k) {
        if (s.nbar[k] < 0.0) fail("thermal.nbar", "occupations must be non-negative");
    }
    s.trials = opt_int(t, "thermal", "trials", 100);
    if (s.trials < 1) fail("thermal.trials", "must be positive");
    if (auto it = t.find("seed"); it != t.end()) {
        if (!it->is_number_integer() ||
            (!it->is_number_unsigned() && it->get<long long>() < 0)) {
            fail("thermal.seed", "expected a non-negative integer");
        }
        s.seed = it->get<std::uint64_t>();
    }
}

void parse_times(const json& doc, Scenario& s) {
    const json& t = member(doc, "scenario", "times");
    check_keys(t, "times", {"start_ms", "stop_ms", "step_ms"});
    const double start = as_double(member(t, "times", "start_ms"), "times.start_ms");
    const double stop = as_double(member(t, "times", "stop_ms"), "times.stop_ms");
    const double step = as_double(member(t, "times", "step_ms"), "times.step_ms");
    if (step <= 0.0) fail("times.step_ms", "must be positive");
    if (stop <= start) fail("times.stop_ms", "must exceed start_ms");
    const long long count = std::llround((stop - start) / step);
    if (count < 1 || std::abs(start + static_cast<double>(count) * step - stop) >
                         1e-6 * std::max(1.0, std::abs(stop))) {
        fail("times", "grid span is not a whole number of steps");
    }
    s.times.resize(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= count; ++i) {
        s.times[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * step;
    }
}

void parse_truncation(const json& doc, Scenario& s) {
    auto it = doc.find("truncation");
    if (it == doc.end()) return;
    const json& t = *it;
    check_keys(t, "truncation", {"kept_modes", "excitation_cap", "dense_cutoff", "max_dimension"});
    s.kept_modes = opt_int(t, "truncation", "kept_modes", s.kept_modes);
    if (s.kept_modes < 1 || s.kept_modes > s.trap.ion_count) {
        fail("truncation.kept_modes", "must be between 1 and ion_count");
    }
    s.excitation_cap = opt_int(t, "truncation", "excitation_cap", s.excitation_cap);
    if (s.excitation_cap < 1) fail("truncation.excitation_cap", "must be positive");
    const int dense_cutoff =
        opt_int(t, "truncation", "dense_cutoff", static_cast<int>(s.step.dense_cutoff));
    if (dense_cutoff < 0) fail("truncation.dense_cutoff", "must be non-negative");
    s.step.dense_cutoff = dense_cutoff;
    const long long max_dim =
        static_cast<long long>(opt_double(t, "truncation", "max_dimension",
                                          static_cast<double>(s.max_dimension)));
    if (max_dim < 1) fail("truncation.max_dimension", "must be positive");
    s.max_dimension = static_cast<std::uint64_t>(max_dim);
}

void parse_propagation(const json& doc, Scenario& s) {
    auto it = doc.find("propagation");
    if (it == doc.end()) return;
    const json& p = *it;
    check_keys(p, "propagation",
               {"krylov_tol", "max_krylov_dim", "step_limit_factor", "explicit_step_ms",
                "force_midpoint"});
    s.step.krylov_tol = opt_double(p, "propagation", "krylov_tol", s.step.krylov_tol);
    if (s.step.krylov_tol <= 0.0) fail("propagation.krylov_tol", "must be positive");
    s.step.max_krylov_dim = opt_int(p, "propagation", "max_krylov_dim", s.step.max_krylov_dim);
    if (s.step.max_krylov_dim < 2) fail("propagation.max_krylov_dim", "must be at least 2");
    s.step.step_limit_factor =
        opt_double(p, "propagation", "step_limit_factor", s.step.step_limit_factor);
    if (s.step.step_limit_factor <= 0.0) fail("propagation.step_limit_factor", "must be positive");
    s.step.explicit_step = opt_double(p, "propagation", "explicit_step_ms", s.step.explicit_step);
    if (s.step.explicit_step < 0.0) fail("propagation.explicit_step_ms", "must be non-negative");
    if (auto f = p.find("force_midpoint"); f != p.end()) {
        s.step.force_midpoint = as_bool(*f, "propagation.force_midpoint");
    }
}

void parse_output(const json& doc, Scenario& s) {
    auto it = doc.find("output");
    if (it == doc.end()) return;
    const json& o = *it;
    check_keys(o, "output", {"shot_noise", "spectrum_points"});
    s.shot_noise = opt_int(o, "output", "shot_noise", s.shot_noise);
    if (s.shot_noise < 0) fail("output.shot_noise", "must be non-negative");
    s.spectrum_points = opt_int(o, "output", "spectrum_points", s.spectrum_points);
    if (s.spectrum_points < 2) fail("output.spectrum_points", "need at least two points");
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    check_keys(doc, "scenario",
               {"name", "chain", "coupling", "drive", "thermal", "times", "truncation",
                "propagation", "output"});
    Scenario s;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) fail("name", "expected a string");
        s.name = it->get<std::string>();
    }
    parse_chain(doc, s);
    s.kept_modes = std::min(s.kept_modes, s.trap.ion_count);
    parse_coupling(doc, s);
    parse_drive(doc, s);
    parse_thermal(doc, s);
    parse_times(doc, s);
    parse_truncation(doc, s);
    parse_propagation(doc, s);
    parse_output(doc, s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("scenario/io", "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("scenario/parse", path + ": " + e.what());
    }
    return parse_scenario(doc);
}

json canonical_json(const Scenario& s) {
    json doc;
    doc["name"] = s.name;

    json chain;
    chain["ion_count"] = s.trap.ion_count;
    chain["transverse_freq_khz"] = units::rad_per_ms_to_khz(s.trap.transverse_freq);
    if (s.trap.axial_freq) {
        chain["axial_freq_khz"] = units::rad_per_ms_to_khz(*s.trap.axial_freq);
    } else {
        chain["target_mean_spacing_um"] = *s.trap.target_mean_spacing;
    }
    chain["ion_mass_amu"] = s.trap.ion_mass_amu;
    doc["chain"] = chain;

    json coupling;
    coupling["target_ion"] = s.target_ion;
    coupling["g_com_khz"] = units::rad_per_ms_to_khz(s.com_sideband_rate);
    doc["coupling"] = coupling;

    json drive;
    drive["spin_detuning_khz"] = units::rad_per_ms_to_khz(s.spin_detuning);
    drive["tones"] = json::array();
    for (const Tone& tone : s.tones) {
        drive["tones"].push_back({{"offset_khz", units::rad_per_ms_to_khz(tone.offset)},
                                  {"phase_rad", tone.phase},
                                  {"weight", tone.weight}});
    }
    doc["drive"] = drive;

    json thermal;
    thermal["nbar"] = std::vector<double>(s.nbar.data(), s.nbar.data() + s.nbar.size());
    thermal["trials"] = s.trials;
    thermal["seed"] = s.seed;
    doc["thermal"] = thermal;

    json times;
    times["start_ms"] = s.times.front();
    times["stop_ms"] = s.times.back();
    times["step_ms"] = s.times.size() > 1 ? s.times[1] - s.times[0] : 0.0;
    doc["times"] = times;

    json truncation;
    truncation["kept_modes"] = s.kept_modes;
    truncation["excitation_cap"] = s.excitation_cap;
    truncation["dense_cutoff"] = s.step.dense_cutoff;
    truncation["max_dimension"] = s.max_dimension;
    doc["truncation"] = truncation;

    json propagation;
    propagation["krylov_tol"] = s.step.krylov_tol;
    propagation["max_krylov_dim"] = s.step.max_krylov_dim;
    propagation["step_limit_factor"] = s.step.step_limit_factor;
    propagation["explicit_step_ms"] = s.step.explicit_step;
    propagation["force_midpoint"] = s.step.force_midpoint;
    doc["propagation"] = propagation;

    json output;
    output["shot_noise"] = s.shot_noise;
    output["spectrum_points"] = s.spectrum_points;
    doc["output"] = output;

    return doc;
}

std::string scenario_hash(const Scenario& s) {
    const std::uint64_t h = fnv1a64(canonical_json(s).dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace ionsbm::scenario
