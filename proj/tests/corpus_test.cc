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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "morphtag/corpus.h"
#include "morphtag/errors.h"
#include "morphtag/utf8.h"
#include "support/synthetic.h"

namespace morphtag {
namespace {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Surfaces(const Sentence& sentence) {
  std::vector<std::string> out;
  for (const auto& t : sentence.tokens) out.push_back(t.surface);
  return out;
}

Corpus Grid(std::size_t sentences, std::size_t tokens_each) {
  std::string text;
  for (std::size_t s = 0; s < sentences; ++s) {
    for (std::size_t t = 0; t < tokens_each; ++t) {
      std::string w = "w" + std::to_string(s) + "_" + std::to_string(t);
      text += w + "\t" + w + "/X\tNoun\n";
    }
    text += "\n";
  }
  return ParseCorpus(text);
}

TEST_CASE("token line maps fields to a segmented token") {
  Corpus c = ParseCorpus("geldi\tgel/Verb+di/Past\tVerb\n");
  REQUIRE(c.sentences.size() == 1);
  const auto& tok = c.sentences[0].tokens.at(0);
  CHECK(tok.surface == "geldi");
  REQUIRE(tok.morphemes.size() == 2);
  CHECK(tok.morphemes[0].surface == "gel");
  CHECK(c.morph_tags.Name(*tok.morphemes[0].tag) == "Verb");
  CHECK(tok.morphemes[1].surface == "di");
  CHECK(c.morph_tags.Name(*tok.morphemes[1].tag) == "Past");
  CHECK(c.pos_tags.Name(*tok.pos) == "Verb");
  CHECK(tok.segmented);
  CHECK_FALSE(tok.is_terminal_punct);
}

TEST_CASE("stem-only word is a single morpheme") {
  Corpus c = ParseCorpus("Şimdi\tŞimdi/Adv\tAdv\n");
  const auto& tok = c.sentences[0].tokens[0];
  CHECK(tok.morphemes.size() == 1);
  CHECK(tok.morphemes[0].surface == "Şimdi");
}

TEST_CASE("blank line separates sentences and repeated blanks collapse") {
  Corpus c = ParseCorpus("a\ta/X\tNoun\n\nb\tb/X\tNoun\n");
  CHECK(c.sentences.size() == 2);
  CHECK(c.sentences[0].tokens.size() == 1);
  CHECK(c.sentences[1].tokens.size() == 1);

  Corpus d = ParseCorpus("\n\na\ta/X\tNoun\n\n\n\nb\tb/X\tNoun\n\n\n");
  CHECK(d.sentences.size() == 2);
}

TEST_CASE("inventories follow first-seen order") {
  Corpus c = ParseCorpus("x\tx/B+y/A\tVerb\nz\tz/C+y/A\tNoun\n");
  CHECK(c.morph_tags.tags() == std::vector<std::string>{"B", "A", "C"});
  CHECK(c.pos_tags.tags() == std::vector<std::string>{"Verb", "Noun"});
}

TEST_CASE("underscore fields mean unsegmented or untagged") {
  Corpus c = ParseCorpus("bu\t_\t_\n");
  const auto& tok = c.sentences[0].tokens[0];
  CHECK_FALSE(tok.segmented);
  REQUIRE(tok.morphemes.size() == 1);
  CHECK(tok.morphemes[0].surface == "bu");
  CHECK_FALSE(tok.morphemes[0].tag.has_value());
  CHECK_FALSE(tok.pos.has_value());
  CHECK(SerializeCorpus(c) == "bu\t_\t_\n");
}

TEST_CASE("morphemes without a tag are kept untagged") {
  Corpus c = ParseCorpus("yazdım\tyaz+dı+m\t_\n");
  const auto& tok = c.sentences[0].tokens[0];
  REQUIRE(tok.morphemes.size() == 3);
  for (const auto& m : tok.morphemes) CHECK_FALSE(m.tag.has_value());
  CHECK(c.morph_tags.empty());
}

TEST_CASE("comment lines are skipped") {
  Corpus c = ParseCorpus("# header\na\ta/X\tNoun\n# mid\nb\tb/X\tNoun\n");
  REQUIRE(c.sentences.size() == 1);
  CHECK(c.sentences[0].tokens.size() == 2);
}

TEST_CASE("a hash-initial token line is a token, not a comment") {
  Corpus c = ParseCorpus("#\t#/Punc\tPunc\n");
  REQUIRE(c.sentences.size() == 1);
  CHECK(c.sentences[0].tokens[0].surface == "#");
}

TEST_CASE("terminal punctuation is exactly period, question and exclamation marks") {
  CHECK(IsTerminalPunctuation("."));
  CHECK(IsTerminalPunctuation("?"));
  CHECK(IsTerminalPunctuation("!"));
  CHECK_FALSE(IsTerminalPunctuation(","));
  CHECK_FALSE(IsTerminalPunctuation("..."));
  CHECK_FALSE(IsTerminalPunctuation("a"));
  Corpus c = ParseCorpus("a\ta/X\tNoun\n.\t./Punc\tPunc\n");
  CHECK(c.sentences[0].tokens[1].is_terminal_punct);
}

TEST_CASE("malformed lines report their line number") {
  auto line_of = [](const std::string& text) {
    try {
      ParseCorpus(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("a\ta/X\tNoun\nb\tb/X\n") == 2);
  CHECK(line_of("a\ta/X\tNoun\tExtra\n") == 1);
  CHECK(line_of("a\ta/X\tNoun\n\nb\t/X\tNoun\n") == 3);  // empty morpheme surface
  CHECK(line_of("a\ta/X++b/Y\tNoun\n") == 1);
  CHECK(line_of("a\ta/\tNoun\n") == 1);
  CHECK_THROWS_AS(ParseCorpus("a\ta/X\t\n"), ParseError);
  CHECK_THROWS_AS(ParseCorpus("\ta/X\tNoun\n"), ParseError);
  try {
    ParseCorpus("ok\tok/X\tNoun\nbad line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("CRLF input parses like LF input") {
  Corpus a = ParseCorpus("a\ta/X\tNoun\r\n\r\nb\tb/Y\tVerb\r\n");
  Corpus b = ParseCorpus("a\ta/X\tNoun\n\nb\tb/Y\tVerb\n");
  CHECK(SerializeCorpus(a) == SerializeCorpus(b));
}

TEST_CASE("allomorphic surfaces need not concatenate to the word") {
  Corpus c = ParseCorpus("gidiyor\tgit/Verb+iyor/Prog1\tVerb\n");
  CHECK(c.sentences[0].tokens[0].morphemes[0].surface == "git");
}

TEST_CASE("fixture corpus round-trips byte for byte") {
  for (const char* name : {"gold.tsv", "untagged.tsv"}) {
    auto path = std::filesystem::path(MORPHTAG_FIXTURES) / name;
    std::string original = ReadFile(path);
    CHECK(SerializeCorpus(ReadCorpusFile(path)) == original);
  }
}

TEST_CASE("file round trip through disk") {
  auto src = std::filesystem::path(MORPHTAG_FIXTURES) / "gold.tsv";
  auto dst = std::filesystem::temp_directory_path() / "morphtag_corpus_roundtrip.tsv";
  Corpus c = ReadCorpusFile(src);
  WriteCorpusFile(c, dst);
  CHECK(ReadFile(dst) == ReadFile(src));
  std::filesystem::remove(dst);
}

TEST_CASE("serialize then parse is the identity on generated corpora") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Corpus c = testing::MakeAgglutinativeCorpus(400, seed);
    std::string text = SerializeCorpus(c);
    Corpus back = ParseCorpus(text);
    CHECK(SerializeCorpus(back) == text);
    CHECK(back.TokenCount() == c.TokenCount());
  }
}

TEST_CASE("comments and extra blank lines are normalized away on output") {
  std::string in = "# c\n\na\ta/X\tNoun\n\n\n\nb\tb/X\tNoun\n\n";
  CHECK(SerializeCorpus(ParseCorpus(in)) == "a\ta/X\tNoun\n\nb\tb/X\tNoun\n");
}

TEST_CASE("missing corpus file names the path") {
  try {
    ReadCorpusFile("/nonexistent/dir/corpus.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/corpus.tsv") != std::string::npos);
  }
}

TEST_CASE("frozen inventory rejects new tags but still resolves known ones") {
  TagInventory inv(TagKind::kMorph);
  CHECK(inv.Add("A") == 0);
  CHECK(inv.Add("B") == 1);
  CHECK(inv.Add("A") == 0);
  inv.Freeze();
  CHECK(inv.Add("B") == 1);
  CHECK_THROWS_AS(inv.Add("C"), ConfigError);
  CHECK_FALSE(inv.Find("C").has_value());
  CHECK_THROWS_AS(inv.Id("C"), DataError);
  CHECK(TagInventory::StandardPosTags().size() == 13);
}

// Punctuation policies.

Corpus PunctSentence() { return ParseCorpus("a\ta/X\tNoun\n,\t,/P\tPunc\nb\tb/X\tNoun\n.\t./P\tPunc\n"); }

TEST_CASE("keep-terminal drops commas but keeps the period") {
  Corpus out = ApplyPunctuationPolicy(PunctSentence(), PunctuationPolicy::kKeepTerminalOnly);
  REQUIRE(out.sentences.size() == 1);
  CHECK(Surfaces(out.sentences[0]) == std::vector<std::string>{"a", "b", "."});
}

TEST_CASE("strip-all drops every punctuation token") {
  Corpus out = ApplyPunctuationPolicy(PunctSentence(), PunctuationPolicy::kStripAll);
  REQUIRE(out.sentences.size() == 1);
  CHECK(Surfaces(out.sentences[0]) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("sentences emptied by filtering are dropped") {
  Corpus c = ParseCorpus(",\t,/P\tPunc\n\na\ta/X\tNoun\n");
  Corpus out = ApplyPunctuationPolicy(c, PunctuationPolicy::kStripAll);
  REQUIRE(out.sentences.size() == 1);
  CHECK(out.sentences[0].tokens[0].surface == "a");
}

TEST_CASE("multi-character and non-ASCII punctuation counts as punctuation") {
  Corpus c = ParseCorpus("a\ta/X\tNoun\n...\t.../P\tPunc\n«\t«/P\tPunc\n\xe2\x80\x94\t\xe2\x80\x94/P\tPunc\n");
  Corpus out = ApplyPunctuationPolicy(c, PunctuationPolicy::kStripAll);
  CHECK(Surfaces(out.sentences[0]) == std::vector<std::string>{"a"});
  CHECK_FALSE(utf8::IsPunctuation("a."));
}

TEST_CASE("punctuation policies are idempotent") {
  Corpus c = testing::MakeAgglutinativeCorpus(600, 3);
  for (auto policy : {PunctuationPolicy::kStripAll, PunctuationPolicy::kKeepTerminalOnly}) {
    Corpus once = ApplyPunctuationPolicy(c, policy);
    Corpus twice = ApplyPunctuationPolicy(once, policy);
    CHECK(SerializeCorpus(once) == SerializeCorpus(twice));
  }
}

TEST_CASE("policy names parse and print") {
  CHECK(ParsePunctuationPolicy("strip") == PunctuationPolicy::kStripAll);
  CHECK(ParsePunctuationPolicy("terminal") == PunctuationPolicy::kKeepTerminalOnly);
  CHECK(ToString(PunctuationPolicy::kStripAll) == "strip");
  CHECK_THROWS_AS(ParsePunctuationPolicy("keep"), ConfigError);
}

// Splitting.

TEST_CASE("split stops at the first crossing of the token budget") {
  Corpus c = Grid(10, 10);
  auto split = SplitTrainTest(c, 50, 7);
  CHECK(split.train.sentences.size() == 5);
  CHECK(split.test.sentences.size() == 5);
  auto odd = SplitTrainTest(c, 51, 7);
  CHECK(odd.train.sentences.size() == 6);
}

TEST_CASE("zero train tokens leaves everything on the test side") {
  Corpus c = Grid(4, 3);
  auto split = SplitTrainTest(c, 0, 1);
  CHECK(split.train.sentences.empty());
  CHECK(split.test.TokenCount() == 12);
}

TEST_CASE("asking for more tokens than exist is an error") {
  CHECK_THROWS_AS(SplitTrainTest(Grid(2, 2), 5, 1), DataError);
  CHECK_NOTHROW(SplitTrainTest(Grid(2, 2), 4, 1));
}

TEST_CASE("split is deterministic per seed and partitions the corpus") {
  Corpus c = testing::MakeAgglutinativeCorpus(3000, 11);
  auto a = SplitTrainTest(c, 1200, 42);
  auto b = SplitTrainTest(c, 1200, 42);
  CHECK(SerializeCorpus(a.train) == SerializeCorpus(b.train));
  CHECK(SerializeCorpus(a.test) == SerializeCorpus(b.test));
  auto other = SplitTrainTest(c, 1200, 43);
  CHECK(SerializeCorpus(other.train) != SerializeCorpus(a.train));

  // Every original sentence lands on exactly one side.
  std::multiset<std::string> original, parts;
  auto line = [](const Corpus& corpus, const Sentence& s) {
    Corpus one;
    one.morph_tags = corpus.morph_tags;
    one.pos_tags = corpus.pos_tags;
    one.sentences.push_back(s);
    return SerializeCorpus(one);
  };
  for (const auto& s : c.sentences) original.insert(line(c, s));
  for (const auto& s : a.train.sentences) parts.insert(line(a.train, s));
  for (const auto& s : a.test.sentences) parts.insert(line(a.test, s));
  CHECK(original == parts);
  CHECK(a.train.TokenCount() >= 1200);
  std::size_t longest = 0;
  for (const auto& s : a.train.sentences) longest = std::max(longest, s.tokens.size());
  CHECK(a.train.TokenCount() - longest < 1200);
}

}  // namespace
}  // namespace morphtag
