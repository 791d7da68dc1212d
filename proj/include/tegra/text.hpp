// Copyright 2026 The tegra Authors.
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

#ifndef TEGRA_TEXT_HPP_
#define TEGRA_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace tegra {

/// Lowercase tokens split on whitespace and ASCII punctuation. Bytes >= 0x80
/// are treated as word characters so UTF-8 words stay intact. This is the
/// single tokenizer shared by node normalization, gazetteer keys and the
/// word-vector lookups.
std::vector<std::string> tokenize(std::string_view text);

/// tokenize() joined with single spaces: lowercase, punctuation stripped,
/// whitespace collapsed. Empty when the phrase has no word characters.
std::string normalize(std::string_view phrase);

std::string_view trim(std::string_view s);

/// Whitespace-separated tokens with original casing and punctuation.
std::vector<std::string> split_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Number of whitespace-separated words.
std::size_t word_count(std::string_view text);

}  // namespace tegra

#endif  // TEGRA_TEXT_HPP_
