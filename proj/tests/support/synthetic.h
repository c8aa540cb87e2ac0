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

// Seeded generators for synthetic gold-annotated corpora. Each returns
// whole sentences until at least `min_tokens` tokens exist.

#ifndef MORPHTAG_TESTS_SUPPORT_SYNTHETIC_H_
#define MORPHTAG_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "morphtag/corpus.h"

namespace morphtag::testing {

// Appends a token built from (surface, tag) morpheme pairs; an empty tag
// leaves the morpheme untagged.
void AppendToken(Corpus& corpus, Sentence& sentence,
                 const std::vector<std::pair<std::string, std::string>>& morphemes,
                 const std::string& pos);

// Nouns and verbs with small suffix paradigms, every morpheme tag a
// deterministic function of its surface and the preceding morpheme's tag.
// Nouns always carry at least one suffix, so the last morpheme tag
// determines the PoS of every open-class word. The noun stem "ev" is never
// generated.
Corpus MakeRuleTaggedCorpus(std::size_t min_tokens, std::uint64_t seed,
                            bool terminal_punct = true);

// Agglutinative corpus over the 13 standard PoS tags: large Zipfian stem
// lexicons, more than 50 morpheme tag types with allomorphs, open-class
// words whose final suffix tag signals the PoS (replaced by another class's
// suffix with probability `noise`), single-morpheme closed-class words and
// sentence-final periods.
Corpus MakeAgglutinativeCorpus(std::size_t min_tokens, std::uint64_t seed, double noise = 0.1);

// Word-segmented corpus with strong sentence-boundary effects: ambiguous
// words read as pronouns sentence-initially and as determiners elsewhere,
// and as verbs sentence-finally but nouns elsewhere. A fraction
// `missing_terminal` of sentences lacks the final period.
Corpus MakeBoundaryCorpus(std::size_t min_tokens, std::uint64_t seed,
                          double missing_terminal = 0.3);

// Samples from one fixed five-tag trigram HMM (the parameters do not depend
// on `seed`). Each tag emits from its own Zipfian 400-word list, or from a
// small shared list of ambiguous words a quarter of the time.
Corpus MakeGroundTruthHmmCorpus(std::size_t min_tokens, std::uint64_t seed);

double TypeTokenRatio(const Corpus& corpus);
std::size_t UsedMorphTagTypes(const Corpus& corpus);

}  // namespace morphtag::testing

#endif  // MORPHTAG_TESTS_SUPPORT_SYNTHETIC_H_
