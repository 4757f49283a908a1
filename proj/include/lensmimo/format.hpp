// SPDX-License-Identifier: Apache-2.0
//
// lensmimo: link-level simulator for RF lens-embedded massive MIMO downlinks
// Copyright (C) 2026 The lensmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef LENSMIMO_FORMAT_HPP
#define LENSMIMO_FORMAT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lensmimo
{
    // Shortest decimal form that parses back to the identical double
    std::string format_double(double value);

    // "[a, b, c]" with format_double entries
    std::string format_list(const std::vector<double> &values);

    // 64-bit FNV-1a
    std::uint64_t fnv1a64(std::string_view data);

    std::string to_hex(std::uint64_t value);
}

#endif
