// Copyright 2026 The JEI Surface Editing Authors
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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jei/session.hpp"

namespace jei {

/// Session file: a CBOR map holding the inputs (volumes as EVF bytes, column
/// sets, current cost tables, graph spec), the residual snapshot, the edit
/// stack with prior costs, the baseline digest and the generation counter.
/// Numeric arrays are stored as little-endian binary blobs.
std::vector<std::uint8_t> encode_session(const Session& s);
Session decode_session(std::span<const std::uint8_t> bytes);

void save_session(const Session& s, const std::filesystem::path& path);
Session load_session(const std::filesystem::path& path);

}  // namespace jei
