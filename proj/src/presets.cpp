#include "ionsbm/presets.hpp"

namespace ionsbm::presets {

namespace {

const char* const kFig2a = R"json({
  "name": "fig2a",
  "chain": {
    "ion_count": 20,
    "transverse_freq_khz": 2397.0,
    "target_mean_spacing_um": 4.6
  },
  "coupling": {
    "target_ion": "edge",
    "g_com_khz": 6.67
  },
  "drive": {
    "spin_detuning_khz": -20.0,
    "tones": [
      {"offset_khz": 0.0}
    ]
  },
  "thermal": {
    "nbar": {"com": 0.9, "tilt": 0.5, "rest": 0.3},
    "trials": 100,
    "seed": 171
  },
  "times": {
    "start_ms": 0.0,
    "stop_ms": 0.5,
    "step_ms": 0.002
  },
  "truncation": {
    "kept_modes": 8,
    "excitation_cap": 8
  }
}
)json";

const char* const kFig2c = R"json({
  "name": "fig2c",
  "chain": {
    "ion_count": 10,
    "transverse_freq_khz": 2397.0,
    "target_mean_spacing_um": 4.6
  },
  "coupling": {
    "target_ion": "edge",
    "g_com_khz": 6.67
  },
  "drive": {
    "spin_detuning_khz": -20.0,
    "tones": [
      {"offset_khz": 0.0}
    ]
  },
  "thermal": {
    "nbar": {"all": 0.2},
    "trials": 100,
    "seed": 171
  },
  "times": {
    "start_ms": 0.0,
    "stop_ms": 0.5,
    "step_ms": 0.002
  },
  "truncation": {
    "kept_modes": 8,
    "excitation_cap": 8
  }
}
)json";

const char* const kFig3a = R"json({
  "name": "fig3a",
  "chain": {
    "ion_count": 20,
    "transverse_freq_khz": 2397.0,
    "target_mean_spacing_um": 4.6
  },
  "coupling": {
    "target_ion": "edge",
    "g_com_khz": 6.67
  },
  "drive": {
    "spin_detuning_khz": -50.0,
    "tones": [
      {"offset_khz": 0.0}
    ]
  },
  "thermal": {
    "nbar": {"com": 0.9, "tilt": 0.5, "rest": 0.3},
    "trials": 100,
    "seed": 171
  },
  "times": {
    "start_ms": 0.0,
    "stop_ms": 0.5,
    "step_ms": 0.002
  },
  "truncation": {
    "kept_modes": 8,
    "excitation_cap": 8
  }
}
)json";

const char* const kFig3b = R"json({
  "name": "fig3b",
  "chain": {
    "ion_count": 20,
    "transverse_freq_khz": 2397.0,
    "target_mean_spacing_um": 4.6
  },
  "coupling": {
    "target_ion": "center",
    "g_com_khz": 6.67
  },
  "drive": {
    "spin_detuning_khz": -15.0,
    "tones": [
      {"offset_khz": 0.0}
    ]
  },
  "thermal": {
    "nbar": {"com": 0.9, "tilt": 0.5, "rest": 0.3},
    "trials": 100,
    "seed": 171
  },
  "times": {
    "start_ms": 0.0,
    "stop_ms": 0.5,
    "step_ms": 0.002
  },
  "truncation": {
    "kept_modes": 8,
    "excitation_cap": 8
  }
}
)json";

const char* const kFig4b = R"json({
  "name": "fig4b",
  "chain": {
    "ion_count": 20,
    "transverse_freq_khz": 2397.0,
    "target_mean_spacing_um": 4.6
  },
  "coupling": {
    "target_ion": "edge",
    "g_com_khz": 6.67
  },
  "drive": {
    "spin_detuning_khz": -20.0,
    "tones": [
      {"offset_khz": 0.0},
      {"offset_khz": 20.0}
    ]
  },
  "thermal": {
    "nbar": {"com": 0.9, "tilt": 0.5, "rest": 0.3},
    "trials": 100,
    "seed": 171
  },
  "times": {
    "start_ms": 0.0,
    "stop_ms": 0.5,
    "step_ms": 0.002
  },
  "truncation": {
    "kept_modes": 8,
    "excitation_cap": 8
  }
}
)json";

}  // namespace

const std::vector<Preset>& all() {
    static const std::vector<Preset> presets = {
        {"fig2a", "20-ion chain, edge ion, spin 20 kHz below the COM mode", kFig2a},
        {"fig2c", "10-ion chain at the same spacing, edge ion, all modes at nbar 0.2", kFig2c},
        {"fig3a", "edge ion retuned to 50 kHz below the COM mode", kFig3a},
        {"fig3b", "central ion, 15 kHz below the COM mode", kFig3b},
        {"fig4b", "bichromatic drive, second tone 20 kHz above the first", kFig4b},
    };
    return presets;
}

const Preset* find(const std::string& name) {
    for (const Preset& p : all()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

}  // namespace ionsbm::presets
