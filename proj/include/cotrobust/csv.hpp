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

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cotrobust {

// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);
std::string format_optional(const std::optional<int>& value);

std::string csv_escape(std::string_view field);

// RFC-4180 writer: CRLF line endings, fields quoted only when needed.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<std::string_view> fields);

 private:
  std::ofstream out_;
};

// Parses RFC-4180 text (quoted fields, embedded separators and newlines).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace cotrobust
