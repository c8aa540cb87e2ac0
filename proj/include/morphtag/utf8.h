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

// Minimal UTF-8 helpers. Invalid byte sequences are treated as one
// character per byte rather than rejected.

#ifndef MORPHTAG_UTF8_H_
#define MORPHTAG_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morphtag::utf8 {

// Splits `text` into per-character substrings.
std::vector<std::string_view> Characters(std::string_view text);

std::size_t Length(std::string_view text);

// First / last `count` characters; the whole string if shorter.
std::string Prefix(std::string_view text, std::size_t count);
std::string Suffix(std::string_view text, std::size_t count);

// Lowercases ASCII plus the Turkish capitals Ç Ğ İ Ö Ş Ü.
std::string ToLower(std::string_view text);

// True when every character is punctuation (ASCII punctuation, Latin-1
// punctuation, or the General Punctuation block). Empty text is false.
bool IsPunctuation(std::string_view text);

}  // namespace morphtag::utf8

#endif  // MORPHTAG_UTF8_H_
