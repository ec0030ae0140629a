// Copyright 2026 The ccl Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>
#include <vector>

namespace ccl {

// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyMaskError : Error {
  using Error::Error;
};

struct OutOfBoundsError : Error {
  using Error::Error;
};

struct EmptyRegionError : Error {
  using Error::Error;
};

struct EmptyDonorPoolError : Error {
  using Error::Error;
};

struct EndpointUnreachableError : Error {
  using Error::Error;
};

struct BackendFailureError : Error {
  using Error::Error;
};

// Raised when a batch generation run fails for some prompts; successes are
// persisted before this is thrown.
struct PartialFailureError : Error {
  PartialFailureError(const std::string& msg, std::vector<std::string> failed)
      : Error(msg), failed_prompts(std::move(failed)) {}
  std::vector<std::string> failed_prompts;
};

struct PoolTooSmallError : Error {
  using Error::Error;
};

struct PoolOverlapError : Error {
  using Error::Error;
};

struct BudgetTooSmallError : Error {
  BudgetTooSmallError(const std::string& msg, std::vector<int> uncovered)
      : Error(msg), categories_uncovered(std::move(uncovered)) {}
  std::vector<int> categories_uncovered;
};

struct ZeroNormVectorError : Error {
  using Error::Error;
};

struct NonPositiveTauError : Error {
  using Error::Error;
};

struct MissingTextBatchError : Error {
  using Error::Error;
};

struct NonFiniteError : Error {
  using Error::Error;
};

struct EmptyGroundTruthError : Error {
  using Error::Error;
};

struct EmptyListError : Error {
  using Error::Error;
};

struct ZeroCleanScoreError : Error {
  using Error::Error;
};

struct ConfigInvalidError : Error {
  using Error::Error;
};

struct IoFailureError : Error {
  using Error::Error;
};

}  // namespace ccl
