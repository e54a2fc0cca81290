// Copyright 2026-present the amsh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "amsh/matrix.hpp"

namespace amsh {

/// DMT: plain-text dense matrix container.
///
///   line 1:  "DMT 1 <rows> <cols>"
///   then exactly <rows> lines of <cols> numbers separated by single spaces.
///
/// Values are rendered as the shortest decimal string that parses back to
/// the identical binary64, so store/load round-trips are bit-exact and
/// integral values (labels, sign codes) come out as integer tokens.

std::string format_double(double v);

Matrix load_matrix(const std::filesystem::path& path);
void store_matrix(const std::filesystem::path& path, const Matrix& m);

/// Key-value sidecar files ("key=value" per line, keys sorted on write).
using KvFile = std::map<std::string, std::string>;

KvFile load_kv(const std::filesystem::path& path);
void store_kv(const std::filesystem::path& path, const KvFile& kv);

const std::string& kv_get(const KvFile& kv, const std::string& key);
double kv_get_double(const KvFile& kv, const std::string& key);
long long kv_get_int(const KvFile& kv, const std::string& key);

}  // namespace amsh
