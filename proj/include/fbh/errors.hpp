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

#pragma once

#include <stdexcept>
#include <string>

namespace fbh {

enum class ErrorCode {
    ok = 0,
    domain,
    contract,
    herald_impossible,
    not_converged,
    rank_deficient,
    config,
    io,
};

const char *error_code_name(ErrorCode code);

class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

   private:
    ErrorCode code_;
};

[[noreturn]] inline void domain_error(const std::string &what) { throw Error(ErrorCode::domain, what); }
[[noreturn]] inline void contract_error(const std::string &what) { throw Error(ErrorCode::contract, what); }
[[noreturn]] inline void config_error(const std::string &what) { throw Error(ErrorCode::config, what); }

}  // namespace fbh
