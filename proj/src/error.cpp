// Copyright 2026 The cotrobust Authors
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

#include "cotrobust/error.hpp"

namespace cotrobust {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLoad: return "load";
    case ErrorKind::kRecord: return "record";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kCapability: return "capability";
    case ErrorKind::kEmptyGeneration: return "empty-generation";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kEnvironment: return "environment";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kArity: return "arity";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kGrouping: return "grouping";
    case ErrorKind::kBaselineUndefined: return "baseline-undefined";
    case ErrorKind::kFit: return "fit";
    case ErrorKind::kUndefined: return "undefined";
  }
  return "unknown";
}

}  // namespace cotrobust
