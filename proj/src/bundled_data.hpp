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

#include <string_view>

// Copies of data/*.tsv and data/templates/*.txt compiled into the library.
namespace cotrobust::data {

extern const std::string_view kKeyboardTsv;
extern const std::string_view kThesaurusTsv;
extern const std::string_view kInflectionsTsv;
extern const std::string_view kParaphraseTsv;
extern const std::string_view kNocotBase;
extern const std::string_view kNocotAware;
extern const std::string_view kCotBase;
extern const std::string_view kCotAware;

}  // namespace cotrobust::data
