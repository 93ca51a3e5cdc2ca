// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ilora {

enum class ErrorKind {
    Contract,      // precondition / shape violation
    Config,        // invalid experiment configuration
    Missing,       // required artifact (file, checkpoint) absent
    Numeric,       // non-finite value produced or consumed
    Degenerate,    // input has no information (e.g. constant representation)
    Undefined,     // metric requested outside its domain
    Oracle,        // finite-difference oracle evaluated a non-finite loss
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(ErrorKind::Contract, msg);
}

}  // namespace ilora
