// Copyright 2026 The specmix Authors. All Rights Reserved.
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

namespace specmix {

// All library failures derive from Error so callers (the CLI in particular)
// can map categories onto exit codes with a single catch ladder.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPECMIX_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

SPECMIX_DEFINE_ERROR(DimensionMismatch);
SPECMIX_DEFINE_ERROR(NonPowerOfTwo);
SPECMIX_DEFINE_ERROR(EmptyBatch);
SPECMIX_DEFINE_ERROR(DegenerateField);
SPECMIX_DEFINE_ERROR(ValueError);
SPECMIX_DEFINE_ERROR(ChannelMismatch);
SPECMIX_DEFINE_ERROR(CacheMismatch);
SPECMIX_DEFINE_ERROR(ShapeMismatch);
SPECMIX_DEFINE_ERROR(InvalidGeometry);
SPECMIX_DEFINE_ERROR(EmptyMask);
SPECMIX_DEFINE_ERROR(UnknownVariant);
SPECMIX_DEFINE_ERROR(UnknownBaseline);

// I/O and file-format failures.
SPECMIX_DEFINE_ERROR(IoError);
SPECMIX_DEFINE_ERROR(FormatError);

// Non-finite loss during training.
SPECMIX_DEFINE_ERROR(DivergenceError);

#undef SPECMIX_DEFINE_ERROR

}  // namespace specmix
