#pragma once

#include <string>
#include <utility>

#include "ionsbm/errors.hpp"

namespace testutil {

// Runs f and returns the ionsbm error code it throws, or "" if it does not throw.
template <typename F>
std::string error_code_of(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const ionsbm::Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace testutil
