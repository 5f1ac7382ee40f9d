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

#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "t3l/error.hpp"
#include "t3l/vocab/vocabulary.hpp"
#include "test_helpers.hpp"

using namespace t3l;
using vocab::Corpus;
using vocab::Vocabulary;

namespace {

Vocabulary small_vocab() {
  const std::vector<Corpus> corpora{
      {{"b", "a", "a"}, {"c", "a"}},
      {{"b", "d"}, {"a"}},
  };
  return Vocabulary::build(corpora);
}

std::string mismatch_message(const Vocabulary& a, const Vocabulary& b) {
  try {
    vocab::assert_alignment(a, b);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("vocab") {
  TEST_CASE("tokenize splits on any whitespace") {
    CHECK(vocab::tokenize("  a\tbb \n c ") == vocab::Sentence{"a", "bb", "c"});
    CHECK(vocab::tokenize("").empty());
    const vocab::Sentence s{"x", "y"};
    CHECK(vocab::join(s) == "x y");
  }

  TEST_CASE("specials come first with fixed ids") {
    const Vocabulary v;
    REQUIRE(v.size() == vocab::kSpecialTokens.size());
    CHECK(v.token(vocab::kPad) == "<pad>");
    CHECK(v.token(vocab::kBos) == "<bos>");
    CHECK(v.token(vocab::kEos) == "<eos>");
    CHECK(v.token(vocab::kUnk) == "<unk>");
    CHECK(v.token(vocab::kCls) == "<cls>");
  }

  TEST_CASE("build orders by frequency then lexicographically") {
    const Vocabulary v = small_vocab();
    // a:4, b:2, c:1, d:1
    CHECK(v.size() == 9);
    CHECK(v.token(5) == "a");
    CHECK(v.token(6) == "b");
    CHECK(v.token(7) == "c");
    CHECK(v.token(8) == "d");
    const std::vector<Corpus> corpora{{{"b", "a", "a"}, {"c", "a"}}, {{"b", "d"}, {"a"}}};
    CHECK(Vocabulary::build(corpora, 2).size() == 7);
  }

  TEST_CASE("build rejects empty input") {
    CHECK_THROWS_AS(Vocabulary::build(std::vector<Corpus>{}), Error);
    CHECK_THROWS_AS(Vocabulary::build(std::vector<Corpus>{{{}}}), Error);
  }

  TEST_CASE("encode and decode") {
    const Vocabulary v = small_vocab();
    const vocab::Sentence s{"a", "zzz", "d"};
    CHECK(v.encode(s) == std::vector<vocab::TokenId>{5, vocab::kUnk, 8});
    CHECK(v.encode_target(s) == std::vector<vocab::TokenId>{vocab::kBos, 5, vocab::kUnk, 8, vocab::kEos});
    const std::vector<vocab::TokenId> ids{vocab::kBos, 6, vocab::kPad, 7, vocab::kEos, 5};
    CHECK(v.decode_text(ids) == vocab::Sentence{"b", "c"});
    CHECK(v.decode(std::vector<vocab::TokenId>{5, 6}) == vocab::Sentence{"a", "b"});
    CHECK_THROWS_AS(v.token(99), Error);
  }

  TEST_CASE("save and load round trip") {
    const Vocabulary v = small_vocab();
    const auto dir = t3l::testing::temp_dir("vocab");
    v.save(dir / "vocab.txt");
    const Vocabulary w = Vocabulary::load(dir / "vocab.txt");
    CHECK(v == w);
    CHECK(v.content_hash() == w.content_hash());
    CHECK(w.id("c") == 7);
  }

  TEST_CASE("load rejects malformed files") {
    const auto dir = t3l::testing::temp_dir("vocab-bad");
    const auto write = [&](const std::string& name, const std::string& text) {
      std::ofstream(dir / name) << text;
      return dir / name;
    };
    CHECK_THROWS_AS(Vocabulary::load(write("a", "<pad>\n<eos>\n")), Error);
    CHECK_THROWS_AS(Vocabulary::load(write("b", "<pad>\n<bos>\n<eos>\n<unk>\n<cls>\nx\nx\n")), Error);
    CHECK_THROWS_AS(Vocabulary::load(write("c", "<pad>\n<bos>\n<eos>\n<unk>\n<cls>\ntwo words\n")), Error);
    CHECK_THROWS_AS(Vocabulary::load(dir / "missing"), Error);
  }

  TEST_CASE("fnv1a reference values") {
    CHECK(vocab::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(vocab::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(vocab::fnv1a("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("alignment reports the first mismatching index") {
    const Vocabulary v = small_vocab();
    CHECK_NOTHROW(vocab::assert_alignment(v, v));
    const std::vector<Corpus> other{{{"a", "a", "a", "a"}, {"b", "b"}, {"c", "e"}}};
    const Vocabulary w = Vocabulary::build(other);
    CHECK(mismatch_message(v, w).find("index 8") != std::string::npos);
    const std::vector<Corpus> shorter{{{"a", "a", "b"}}};
    CHECK(mismatch_message(v, Vocabulary::build(shorter)).find("index 7") != std::string::npos);
  }
}
