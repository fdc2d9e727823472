// Copyright 2026 The Folio Authors
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

namespace folio::cli {

/// Exit codes: 0 success, 2 a validation or certification failed (reports are
/// still written), 1 structural or I/O error, 64 usage error.
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kCheckFailed = 2;
inline constexpr int kUsage = 64;

int run(int argc, char** argv);

}  // namespace folio::cli
