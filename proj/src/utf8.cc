// Copyright 2026 The Morphtag Authors. All Rights Reserved.
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

#include "morphtag/utf8.h"

#include <cctype>
#include <cstdint>

namespace morphtag::utf8 {
namespace {

std::size_t SequenceLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// Decodes one character starting at `pos`; returns its byte length.
std::size_t Decode(std::string_view text, std::size_t pos, char32_t* out) {
  auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = SequenceLength(lead);
  if (pos + len > text.size()) len = 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(text[pos + k]) & 0xC0) != 0x80) {
      len = 1;
      break;
    }
  }
  char32_t cp = 0;
  switch (len) {
    case 1: cp = lead; break;
    case 2: cp = lead & 0x1F; break;
    case 3: cp = lead & 0x0F; break;
    default: cp = lead & 0x07; break;
  }
  for (std::size_t k = 1; k < len; ++k) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[pos + k]) & 0x3F);
  }
  *out = cp;
  return len;
}

bool IsPunctuationCodepoint(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB:
    case 0xBF:
      return true;
    default:
      break;
  }
  return cp >= 0x2010 && cp <= 0x205E;
}

}  // namespace

std::vector<std::string_view> Characters(std::string_view text) {
  std::vector<std::string_view> chars;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    std::size_t len = Decode(text, pos, &cp);
    chars.push_back(text.substr(pos, len));
    pos += len;
  }
  return chars;
}

std::size_t Length(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    pos += Decode(text, pos, &cp);
    ++n;
  }
  return n;
}

std::string Prefix(std::string_view text, std::size_t count) {
  std::size_t pos = 0;
  for (std::size_t n = 0; n < count && pos < text.size(); ++n) {
    char32_t cp;
    pos += Decode(text, pos, &cp);
  }
  return std::string(text.substr(0, pos));
}

std::string Suffix(std::string_view text, std::size_t count) {
  auto chars = Characters(text);
  if (count >= chars.size()) return std::string(text);
  std::size_t start = static_cast<std::size_t>(
      chars[chars.size() - count].data() - text.data());
  return std::string(text.substr(start));
}

std::string ToLower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    std::size_t len = Decode(text, pos, &cp);
    std::string_view piece = text.substr(pos, len);
    pos += len;
    if (len == 1) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(piece[0]))));
      continue;
    }
    switch (cp) {
      case 0xC7: out += "\xC3\xA7"; break;    // Ç -> ç
      case 0x11E: out += "\xC4\x9F"; break;   // Ğ -> ğ
      case 0x130: out += "i"; break;          // İ -> i
      case 0xD6: out += "\xC3\xB6"; break;    // Ö -> ö
      case 0x15E: out += "\xC5\x9F"; break;   // Ş -> ş
      case 0xDC: out += "\xC3\xBC"; break;    // Ü -> ü
      default: out += piece; break;
    }
  }
  return out;
}

bool IsPunctuation(std::string_view text) {
  if (text.empty()) return false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    pos += Decode(text, pos, &cp);
    if (!IsPunctuationCodepoint(cp)) return false;
  }
  return true;
}

}  // namespace morphtag::utf8
