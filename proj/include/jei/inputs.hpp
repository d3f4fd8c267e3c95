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

#include <filesystem>
#include <string>
#include <vector>

#include "jei/phantom.hpp"
#include "jei/pipeline.hpp"

namespace jei {

/// Input validation failure tied to one request field.
class InputError : public Error {
public:
    InputError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)), message_(message) {}

    const std::string& field() const { return field_; }
    const std::string& message() const { return message_; }

private:
    std::string field_;
    std::string message_;
};

/// Exactly one of volume, manifest or phantom. Meshes are required for the
/// first two; a phantom supplies its own reference meshes unless given.
struct InputSources {
    std::filesystem::path volume;
    std::filesystem::path manifest;
    std::filesystem::path phantom;
    std::vector<std::filesystem::path> meshes;
    std::vector<std::string> object_names;
};

SegmentationRequest load_request(const InputSources& src);

/// Rendered time-points of a phantom file with its reference meshes and names.
SegmentationRequest phantom_request(const PhantomFile& f);

/// Error of every surface of `sol` against the analytic truth of a phantom
/// file, in session surface order. Names are capitalized surface names,
/// suffixed with the time-point label when there is more than one.
ErrorReport phantom_error_report(const Session& s, const SurfaceSolution& sol, const PhantomFile& truth);

}  // namespace jei
