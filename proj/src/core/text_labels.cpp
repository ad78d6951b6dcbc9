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

#include "text_labels.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace ctcx {

namespace {

constexpr std::u32string_view kRussianLetters =
    U"абвгдеёжзийклмнопрстуфхцчшщъыьэюя";
constexpr std::u32string_view kKazakhLetters =
    U"аәбвгғдеёжзийкқлмнңоөпрстуұүфхһцчшщъыіьэюя";

constexpr std::string_view kSpaceToken = "<sp>";

std::string describe(char32_t cp) {
  std::ostringstream os;
  os << '\'' << utf8_encode(cp) << "' (U+" << std::hex << std::uppercase
     << static_cast<uint32_t>(cp) << ')';
  return os.str();
}

}  // namespace

std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    int extra = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + static_cast<size_t>(extra) >= text.size() && extra > 0) {
      throw DataError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        throw DataError("invalid UTF-8 continuation byte at offset " +
                        std::to_string(i + k));
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<size_t>(extra) + 1;
  }
  return out;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char32_t cp : text) out += utf8_encode(cp);
  return out;
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 capitals, minus the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Ѐ..Џ -> ѐ..џ
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  // А..Я -> а..я
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  // Historic and extended Cyrillic come in (upper, lower) pairs.
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48A && cp <= 0x4BF) ||
      (cp >= 0x4D0 && cp <= 0x52F)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp == 0x4C0) return 0x4CF;
  if (cp >= 0x4C1 && cp <= 0x4CE) return (cp % 2 == 1) ? cp + 1 : cp;
  return cp;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

Alphabet::Alphabet(std::string name, std::u32string symbols)
    : name_(std::move(name)), symbols_(std::move(symbols)) {
  for (size_t i = 0; i < symbols_.size(); ++i) {
    const char32_t cp = symbols_[i];
    if (!index_.emplace(cp, static_cast<int32_t>(i)).second) {
      throw UsageError("alphabet '" + name_ + "': duplicate symbol " + describe(cp));
    }
    if (to_lower(cp) != cp) {
      throw UsageError("alphabet '" + name_ + "': symbol " + describe(cp) +
                       " is not lowercase");
    }
    if (cp == U' ') {
      space_index_ = static_cast<int32_t>(i);
    } else if (is_space(cp)) {
      throw UsageError("alphabet '" + name_ + "': whitespace symbol " + describe(cp) +
                       " other than the plain space");
    }
  }
  if (space_index_ < 0) {
    throw UsageError("alphabet '" + name_ + "' has no space symbol");
  }
}

int32_t Alphabet::index_of(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? -1 : it->second;
}

std::u32string Alphabet::letters() const {
  std::u32string out;
  for (char32_t cp : symbols_) {
    if (cp != U' ') out.push_back(cp);
  }
  return out;
}

Alphabet builtin_alphabet(std::string_view name) {
  if (name == "ru") return Alphabet("ru", std::u32string(kRussianLetters) + U" ");
  if (name == "kk") return Alphabet("kk", std::u32string(kKazakhLetters) + U" ");
  throw UsageError("unknown built-in alphabet '" + std::string(name) +
                   "' (expected 'kk' or 'ru')");
}

Alphabet load_alphabet_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open alphabet file " + path);
  std::u32string symbols;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kSpaceToken) {
      symbols.push_back(U' ');
      continue;
    }
    const std::u32string cps = utf8_decode(line);
    if (cps.size() != 1) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected exactly one symbol, got '" + line + "'");
    }
    symbols.push_back(cps[0]);
  }
  return Alphabet(std::filesystem::path(path).stem().string(), std::move(symbols));
}

void save_alphabet_file(const Alphabet& alphabet, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write alphabet file " + path);
  for (char32_t cp : alphabet.symbols()) {
    out << (cp == U' ' ? std::string(kSpaceToken) : utf8_encode(cp)) << '\n';
  }
}

Alphabet resolve_alphabet(const std::string& name_or_path) {
  if (name_or_path == "kk" || name_or_path == "ru") return builtin_alphabet(name_or_path);
  if (std::filesystem::exists(name_or_path)) return load_alphabet_file(name_or_path);
  throw UsageError("alphabet '" + name_or_path +
                   "' is neither a built-in name nor an existing file");
}

std::string normalize_transcript(std::string_view raw, const Alphabet& alphabet) {
  // Characters outside the alphabet are dropped before whitespace runs are
  // collapsed, so "a - b" becomes "a b" and the result is idempotent.
  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : utf8_decode(raw)) {
    cp = to_lower(cp);
    if (is_space(cp)) {
      pending_space = true;
      continue;
    }
    if (!alphabet.contains(cp)) continue;
    if (pending_space && !out.empty()) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return utf8_encode(out);
}

LabelSeq encode(std::string_view text, const Alphabet& alphabet) {
  LabelSeq labels;
  const std::u32string cps = utf8_decode(text);
  labels.reserve(cps.size());
  for (size_t pos = 0; pos < cps.size(); ++pos) {
    const int32_t id = alphabet.index_of(cps[pos]);
    if (id < 0) {
      throw DataError("character " + describe(cps[pos]) + " at position " +
                      std::to_string(pos) + " is not in alphabet '" +
                      alphabet.name() + "'");
    }
    labels.push_back(id);
  }
  return labels;
}

std::string decode(const LabelSeq& labels, const Alphabet& alphabet) {
  std::u32string out;
  out.reserve(labels.size());
  for (int32_t id : labels) {
    if (id < 0 || id >= alphabet.size()) {
      throw DataError("label id " + std::to_string(id) + " outside alphabet '" +
                      alphabet.name() + "'");
    }
    out.push_back(alphabet.symbols()[static_cast<size_t>(id)]);
  }
  return utf8_encode(out);
}

double overlap_ratio(const Alphabet& source, const Alphabet& target) {
  const std::u32string target_letters = target.letters();
  if (target_letters.empty()) return 0.0;
  size_t shared = 0;
  for (char32_t cp : target_letters) {
    if (source.contains(cp)) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(target_letters.size());
}

}  // namespace ctcx
