// Copyright 2026 The fbh Authors
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

#include "fbh/errors.hpp"

namespace fbh {

const char *error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ok:
            return "ok";
        case ErrorCode::domain:
            return "domain";
        case ErrorCode::contract:
            return "contract";
        case ErrorCode::herald_impossible:
            return "herald_impossible";
        case ErrorCode::not_converged:
            return "not_converged";
        case ErrorCode::rank_deficient:
            return "rank_deficient";
        case ErrorCode::config:
            return "config";
        case ErrorCode::io:
            return "io";
    }
    return "unknown";
}

}  // namespace fbh
