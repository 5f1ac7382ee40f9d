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

#include "t3l/vocab/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "t3l/error.hpp"

namespace t3l::vocab {

Sentence tokenize(std::string_view text) {
  Sentence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (std::string_view s : kSpecialTokens) push(std::string(s));
}

void Vocabulary::push(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const Corpus> corpora, std::size_t min_count) {
  require(!corpora.empty(), ErrorCategory::kInvalidArgument, "build_shared_vocab: no corpora");
  require(min_count >= 1, ErrorCategory::kInvalidArgument, "build_shared_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  bool any = false;
  for (const Corpus& corpus : corpora) {
    for (const Sentence& sentence : corpus) {
      for (const std::string& tok : sentence) {
        any = true;
        counts[tok] += 1;
      }
    }
  }
  require(any, ErrorCategory::kInvalidArgument, "build_shared_vocab: corpora contain no tokens");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : ranked) {
    if (n < min_count || v.contains(tok)) continue;
    v.push(tok);
  }
  return v;
}

const std::string& Vocabulary::token(TokenId id) const {
  require(id < tokens_.size(), ErrorCategory::kOutOfRange,
          "vocabulary: id " + std::to_string(id) + " >= size " + std::to_string(tokens_.size()));
  return tokens_[id];
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<TokenId> Vocabulary::encode_target(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids{kBos};
  for (const std::string& t : tokens) ids.push_back(id(t));
  ids.push_back(kEos);
  return ids;
}

Sentence Vocabulary::decode(std::span<const TokenId> ids) const {
  Sentence out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(token(i));
  return out;
}

Sentence Vocabulary::decode_text(std::span<const TokenId> ids) const {
  Sentence out;
  for (TokenId i : ids) {
    if (i == kEos) break;
    if (i == kPad || i == kBos || i == kCls) continue;
    out.push_back(token(i));
  }
  return out;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const std::string& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a(serialize()); }

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCategory::kIo, "cannot write vocabulary " + path.string());
  out << serialize();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::kIo, "cannot open vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (lineno < kSpecialTokens.size()) {
      require(line == kSpecialTokens[lineno], ErrorCategory::kFormat,
              path.string() + ": line " + std::to_string(lineno + 1) + " must be " +
                  std::string(kSpecialTokens[lineno]));
    } else {
      require(!line.empty() && tokenize(line).size() == 1 && tokenize(line)[0] == line,
              ErrorCategory::kFormat, path.string() + ": bad token on line " + std::to_string(lineno + 1));
      require(!v.contains(line), ErrorCategory::kFormat,
              path.string() + ": duplicate token " + line + " on line " + std::to_string(lineno + 1));
      v.push(line);
    }
    ++lineno;
  }
  require(lineno >= kSpecialTokens.size(), ErrorCategory::kFormat, path.string() + ": missing special header");
  return v;
}

void assert_alignment(const Vocabulary& translator, const Vocabulary& classifier) {
  const auto& a = translator.tokens();
  const auto& b = classifier.tokens();
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (a[i] != b[i]) {
      fail(ErrorCategory::kInvalidArgument, "vocabulary mismatch at index " + std::to_string(i) + ": '" +
                                                a[i] + "' vs '" + b[i] + "'");
    }
  }
  if (a.size() != b.size()) {
    fail(ErrorCategory::kInvalidArgument, "vocabulary mismatch at index " + std::to_string(common) +
                                              ": sizes " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()));
  }
}

}  // namespace t3l::vocab
