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

#include "clipgrain/edit_distance.h"

#include <cctype>

#include "clipgrain/errors.h"

namespace clipgrain {

size_t EditDistance(std::string_view a, std::string_view b) {
  return EditDistance(std::span<const char>(a.data(), a.size()),
                      std::span<const char>(b.data(), b.size()));
}

double Cer(std::string_view hypothesis, std::string_view reference) {
  if (reference.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "CER of an empty reference");
  }
  return static_cast<double>(EditDistance(hypothesis, reference)) /
         static_cast<double>(reference.size());
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    const size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

double Wer(std::string_view hypothesis, std::string_view reference) {
  const auto ref = SplitWords(reference);
  if (ref.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "WER of an empty reference");
  }
  const auto hyp = SplitWords(hypothesis);
  return static_cast<double>(EditDistance(std::span<const std::string>(hyp),
                                          std::span<const std::string>(ref))) /
         static_cast<double>(ref.size());
}

}  // namespace clipgrain
