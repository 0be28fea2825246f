// Copyright 2026 The Clipgrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLIPGRAIN_EDIT_DISTANCE_H_
#define CLIPGRAIN_EDIT_DISTANCE_H_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clipgrain {

// Levenshtein distance (unit-cost insertions, deletions and substitutions)
// between two token sequences. O(|a|*|b|) time, O(|b|) memory.
template <typename T>
size_t EditDistance(std::span<const T> a, std::span<const T> b) {
  std::vector<size_t> prev(b.size() + 1);
  std::vector<size_t> cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({substitute, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

size_t EditDistance(std::string_view a, std::string_view b);

// Character error rate: EditDistance(hypothesis, reference) / |reference|.
// Throws kUndefinedMetric on an empty reference.
double Cer(std::string_view hypothesis, std::string_view reference);

// Word error rate over whitespace-separated tokens.
double Wer(std::string_view hypothesis, std::string_view reference);

std::vector<std::string> SplitWords(std::string_view text);

}  // namespace clipgrain

#endif  // CLIPGRAIN_EDIT_DISTANCE_H_
