// Copyright 2026 The T3L Authors.
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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace t3l::vocab {

using TokenId = std::size_t;
using Sentence = std::vector<std::string>;
using Corpus = std::vector<Sentence>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kCls = 4;
inline constexpr std::array<std::string_view, 5> kSpecialTokens = {"<pad>", "<bos>", "<eos>", "<unk>",
                                                                   "<cls>"};

Sentence tokenize(std::string_view text);
std::string join(std::span<const std::string> tokens);

// The one token inventory shared by the translator and the classifier. The
// same id must mean the same token on both sides of the soft-translation
// coupling, so both models are built against a single Vocabulary.
class Vocabulary {
 public:
  Vocabulary();

  // Specials first, then tokens by descending frequency (ties broken
  // lexicographically). Tokens seen fewer than min_count times are dropped.
  static Vocabulary build(std::span<const Corpus> corpora, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  // kUnk for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // encode() wrapped as BOS ... EOS, the decoder-side target format.
  std::vector<TokenId> encode_target(std::span<const std::string> tokens) const;
  Sentence decode(std::span<const TokenId> ids) const;
  // decode() without PAD/BOS/EOS/CLS, stopping at the first EOS.
  Sentence decode_text(std::span<const TokenId> ids) const;

  static bool is_special(TokenId id) { return id < kSpecialTokens.size(); }

  std::string serialize() const;
  std::uint64_t content_hash() const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Throws if the two vocabularies differ, naming the first differing index.
void assert_alignment(const Vocabulary& translator, const Vocabulary& classifier);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace t3l::vocab
