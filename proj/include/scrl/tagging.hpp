// Copyright 2026 The scrl Authors.
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

// Parsing of tag-structured curriculum responses.
//
// A curriculum response answers K subproblems inside literal blocks
//
//   <p1> ... </p1> <p2> ... </p2> ... <pK> ... </pK>
//
// All character positions in this header are Unicode scalar-value indices
// into the UTF-8 input, not byte offsets. Answer spans exclude the tag
// characters themselves.

#ifndef SCRL_TAGGING_HPP_
#define SCRL_TAGGING_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scrl {

// Half-open interval [begin, end) of scalar-value positions.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const CharSpan& other) const {
    return other.begin >= begin && other.end <= end;
  }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct AnswerBlock {
  std::size_t index = 0;  // 1-based subproblem index
  CharSpan span;          // content strictly between <pj> and </pj>
  std::optional<std::string> boxed_answer;
};

struct ParsedResponse {
  std::string raw_text;
  bool well_formed = false;
  std::vector<AnswerBlock> blocks;  // size K when well formed, else empty
  std::size_t num_subproblems = 0;
};

// Token -> subproblem assignment; 0 means outside every answer span.
struct TokenSpanMap {
  std::vector<std::size_t> assignment;

  std::size_t size() const { return assignment.size(); }
};

// Well formed iff the recognized tags, in text order, are exactly
// <p1> </p1> <p2> </p2> ... <pK> </pK>. A tag is "<p" or "</p", a canonical
// positive decimal index, and ">", with no whitespace. Other text, including
// text between blocks, is allowed. Throws on K < 1 or invalid UTF-8.
ParsedResponse parse_tagged_response(std::string_view text, std::size_t num_subproblems);

// Content of the last \boxed{...} in the text with balanced braces
// (escaped \{ and \} do not count). Empty optional when absent or when that
// last occurrence is unbalanced.
std::optional<std::string> extract_boxed_answer(std::string_view text);

// Token t maps to j iff its interval lies entirely inside block j's span.
// Offsets must be ascending and non-overlapping; gaps are allowed.
TokenSpanMap map_spans_to_tokens(const ParsedResponse& parsed,
                                 std::span<const CharSpan> token_offsets);

// UTF-8 helpers operating on scalar-value positions.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
std::size_t scalar_length(std::string_view text);
std::string slice_scalars(std::string_view text, CharSpan span);

// Text of one block of a parsed response.
inline std::string block_text(const ParsedResponse& parsed, const AnswerBlock& block) {
  return slice_scalars(parsed.raw_text, block.span);
}

}  // namespace scrl

#endif  // SCRL_TAGGING_HPP_
