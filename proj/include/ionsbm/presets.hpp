#pragma once

#include <string>
#include <vector>

namespace ionsbm::presets {

// Shipped scenario presets. The same documents live under presets/ in the source
// tree; the embedded copies keep the binary self-contained and a test keeps the two
// in sync.
struct Preset {
    std::string name;
    std::string description;
    std::string text;  // verbatim JSON document
};

const std::vector<Preset>& all();

// nullptr when no preset has that name.
const Preset* find(const std::string& name);

}  // namespace ionsbm::presets
