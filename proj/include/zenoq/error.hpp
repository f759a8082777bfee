// Copyright 2026 The zenoq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace zenoq {

/// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
    validation,    // bad input, dimension mismatch, out-of-range parameter
    infeasible,    // empty feasible set or degenerate instance
    verification,  // a circuit failed an equivalence or correctness check
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {
    }
    ErrorKind kind() const noexcept {
        return kind_;
    }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string &what) : Error(ErrorKind::validation, what) {
    }
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string &what) : Error(ErrorKind::infeasible, what) {
    }
};

struct VerificationError : Error {
    explicit VerificationError(const std::string &what) : Error(ErrorKind::verification, what) {
    }
};

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw ValidationError(message);
    }
}

}  // namespace zenoq
