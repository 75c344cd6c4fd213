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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cotrobust {

enum class ErrorKind {
  kLoad,
  kRecord,
  kUsage,
  kConfig,
  kTransport,
  kCapability,
  kEmptyGeneration,
  kVersion,
  kParse,
  kEnvironment,
  kDegenerate,
  kArity,
  kAlignment,
  kGrouping,
  kBaselineUndefined,
  kFit,
  kUndefined,
};

std::string_view to_string(ErrorKind kind);

// Base of every error the harness raises. Callers that need to tell failure
// modes apart switch on kind() instead of catching subclasses.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// A single malformed record inside an otherwise readable corpus file.
class RecordError : public Error {
 public:
  RecordError(std::size_t index, std::string field, const std::string& message)
      : Error(ErrorKind::kRecord, message),
        index_(index),
        field_(std::move(field)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t index_;
  std::string field_;
};

class TransportError : public Error {
 public:
  TransportError(int attempts, const std::string& message)
      : Error(ErrorKind::kTransport, message), attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t byte_position, const std::string& message)
      : Error(ErrorKind::kParse, message), byte_position_(byte_position) {}

  std::size_t byte_position() const noexcept { return byte_position_; }

 private:
  std::size_t byte_position_;
};

}  // namespace cotrobust
