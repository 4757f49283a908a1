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

#ifndef LENSMIMO_ERRORS_HPP
#define LENSMIMO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lensmimo
{
    // Three families, mapped to distinct CLI exit codes:
    //   ConfigError    -> invalid scenario / grid / geometry parameters
    //   NumericalError -> domain violations and degenerate numerics
    //   IoError        -> files that cannot be read, written or parsed

    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Argument outside the mathematical domain of a formula (n <= 1, negative radicand, sigma <= 0 ...)
    class DomainError : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

    // All-zero field, zero channel, zero precoder row
    class DegenerateError : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

    // Grid too coarse to assign at least one sample per antenna
    class ResolutionError : public ConfigError
    {
    public:
        using ConfigError::ConfigError;
    };

    // Focal peak found on the last simulated plane
    class RangeTooShortError : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

    class IllConditionedError : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };
}

#endif
