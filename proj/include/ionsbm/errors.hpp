#pragma once

#include <stdexcept>
#include <string>

namespace ionsbm {

// All module failures surface as Error. `code` is a stable machine-readable
// slash-separated identifier (e.g. "config/unknown_field", "chain/unstable");
// `what()` carries the human-readable message.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

}  // namespace ionsbm
