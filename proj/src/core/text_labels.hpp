// Copyright 2026 The ctcx Authors. All Rights Reserved.
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

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"

namespace ctcx {

// Label ids index Alphabet::symbols(); the CTC blank is never part of one.
using LabelSeq = std::vector<int32_t>;

// UTF-8 helpers. Decoding rejects malformed input with DataError.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
std::string utf8_encode(char32_t cp);

// Simple case folding for Latin, Latin-1 and Cyrillic (including the
// Kazakh letters). Anything else passes through unchanged.
char32_t to_lower(char32_t cp);
bool is_space(char32_t cp);

// An ordered symbol inventory. Class ids are positions in symbols(); the
// blank class is appended after the last symbol.
class Alphabet {
 public:
  // Throws UsageError when the invariants do not hold: no duplicates,
  // exactly one space, all symbols lowercase.
  Alphabet(std::string name, std::u32string symbols);

  const std::string& name() const { return name_; }
  const std::u32string& symbols() const { return symbols_; }
  int32_t size() const { return static_cast<int32_t>(symbols_.size()); }
  int32_t blank_index() const { return size(); }
  int32_t num_classes() const { return size() + 1; }
  int32_t space_index() const { return space_index_; }

  bool contains(char32_t cp) const { return index_.count(cp) != 0; }
  // -1 when absent.
  int32_t index_of(char32_t cp) const;

  // Letters only (space excluded), in class order.
  std::u32string letters() const;

  bool operator==(const Alphabet& other) const {
    return name_ == other.name_ && symbols_ == other.symbols_;
  }

 private:
  std::string name_;
  std::u32string symbols_;
  std::unordered_map<char32_t, int32_t> index_;
  int32_t space_index_ = -1;
};

// "ru": 33 Russian letters + space. "kk": 42 Kazakh Cyrillic letters + space.
// Letters come in their standard alphabetical order, space last.
Alphabet builtin_alphabet(std::string_view name);

// One symbol per line, UTF-8, class order; "<sp>" denotes the space.
// The alphabet name is the file stem.
Alphabet load_alphabet_file(const std::string& path);
void save_alphabet_file(const Alphabet& alphabet, const std::string& path);

// Built-in name or a path to an alphabet file.
Alphabet resolve_alphabet(const std::string& name_or_path);

std::string normalize_transcript(std::string_view raw, const Alphabet& alphabet);

LabelSeq encode(std::string_view text, const Alphabet& alphabet);
std::string decode(const LabelSeq& labels, const Alphabet& alphabet);

// |shared letters| / |target letters|, space excluded from both.
double overlap_ratio(const Alphabet& source, const Alphabet& target);

}  // namespace ctcx
