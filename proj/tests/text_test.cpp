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

#include "tegra/text.hpp"

#include <gtest/gtest.h>

namespace tegra {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Barack Obama, Jr. was-born!"),
            (std::vector<std::string>{"barack", "obama", "jr", "was", "born"}));
  EXPECT_TRUE(tokenize("  ,.;  ").empty());
}

TEST(Tokenize, KeepsUtf8Words) {
  EXPECT_EQ(tokenize("Zürich café"), (std::vector<std::string>{"zürich", "café"}));
}

TEST(Normalize, CollapsesWhitespaceAndPunctuation) {
  EXPECT_EQ(normalize("  The   White-House. "), "the white house");
  EXPECT_EQ(normalize("!!!"), "");
}

TEST(Text, Helpers) {
  EXPECT_EQ(trim("\t a b \n"), "a b");
  EXPECT_EQ(split_whitespace(" a  B,c "), (std::vector<std::string>{"a", "B,c"}));
  EXPECT_EQ(to_lower("MiXeD"), "mixed");
  EXPECT_EQ(word_count("one two  three\nfour"), 4u);
  EXPECT_EQ(word_count(""), 0u);
}

}  // namespace
}  // namespace tegra
