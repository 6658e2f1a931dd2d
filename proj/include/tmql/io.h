// Copyright 2026 The TMQL Authors
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

// File helpers shared by the game, oracle, and report writers.

#ifndef TMQL_IO_H_
#define TMQL_IO_H_

#include <string>

#include "json.hpp"

namespace tmql {

// Throws ParseError if the file is missing or not valid JSON.
nlohmann::json ReadJsonFile(const std::string& path);
// Throws OutputUnwritable.
// Creates missing parent directories.
void WriteTextFile(const std::string& path, const std::string& contents);
void WriteJsonFile(const std::string& path, const nlohmann::json& j);

// Fetches a required field, converting nlohmann errors into ParseError.
template <typename T>
T RequireField(const nlohmann::json& j, const char* key);

}  // namespace tmql

#include "tmql/io_inl.h"

#endif  // TMQL_IO_H_
