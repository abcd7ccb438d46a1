// Copyright 2026 The histmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HISTMUT_PACK_H_
#define HISTMUT_PACK_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "histmut/mutator.h"

namespace histmut {

// Plain-text mutator pack: one [mutator] stanza per entry, `key = value`
// lines, `#` comments. Values with surrounding whitespace, control characters
// or a leading quote are written as JSON string literals.
MutatorRegistry ParsePack(std::string_view text, std::string_view origin = "");
std::string FormatPack(const MutatorRegistry& registry);

MutatorRegistry LoadMutatorPack(const std::filesystem::path& path);
void SaveMutatorPack(const MutatorRegistry& registry,
                     const std::filesystem::path& path);

// Appends every mutator of `extra` to `base`; duplicate ids throw.
MutatorRegistry MergePacks(const MutatorRegistry& base,
                           const MutatorRegistry& extra);

}  // namespace histmut

#endif  // HISTMUT_PACK_H_
