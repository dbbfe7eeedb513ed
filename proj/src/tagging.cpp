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

#include "scrl/tagging.hpp"

#include <limits>

#include "scrl/error.hpp"

namespace scrl {
namespace {

struct Tag {
  bool closing = false;
  std::size_t index = 0;
  std::size_t begin = 0;  // position of '<'
  std::size_t end = 0;    // one past '>'
};

// Recognizes "<pN>" or "</pN>" starting at pos. N is a canonical decimal
// (no leading zero, at least 1).
std::optional<Tag> tag_at(std::u32string_view s, std::size_t pos) {
  if (s[pos] != U'<') return std::nullopt;
  std::size_t i = pos + 1;
  bool closing = false;
  if (i < s.size() && s[i] == U'/') {
    closing = true;
    ++i;
  }
  if (i >= s.size() || s[i] != U'p') return std::nullopt;
  ++i;
  const std::size_t digits_begin = i;
  std::size_t value = 0;
  while (i < s.size() && s[i] >= U'0' && s[i] <= U'9') {
    if (value > (std::numeric_limits<std::size_t>::max() - 9) / 10) return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(s[i] - U'0');
    ++i;
  }
  if (i == digits_begin || s[digits_begin] == U'0') return std::nullopt;
  if (i >= s.size() || s[i] != U'>') return std::nullopt;
  return Tag{closing, value, pos, i + 1};
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead >> 5) == 0x6) {
      len = 2;
      cp = lead & 0x1f;
    } else if ((lead >> 4) == 0xe) {
      len = 3;
      cp = lead & 0x0f;
    } else if ((lead >> 3) == 0x1e) {
      len = 4;
      cp = lead & 0x07;
    } else {
      fail(ErrorCode::kContract, "invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) {
      fail(ErrorCode::kContract, "truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont >> 6) != 0x2) {
        fail(ErrorCode::kContract, "invalid UTF-8 continuation at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (cont & 0x3f);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
      fail(ErrorCode::kContract, "invalid UTF-8 scalar at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return out;
}

std::size_t scalar_length(std::string_view text) { return decode_utf8(text).size(); }

std::string slice_scalars(std::string_view text, CharSpan span) {
  const std::u32string decoded = decode_utf8(text);
  require(span.begin <= span.end && span.end <= decoded.size(),
          "character span out of range");
  return encode_utf8(std::u32string_view(decoded).substr(span.begin, span.size()));
}

ParsedResponse parse_tagged_response(std::string_view text, std::size_t num_subproblems) {
  require(num_subproblems >= 1, "parse_tagged_response: K must be at least 1");
  ParsedResponse parsed;
  parsed.raw_text = std::string(text);
  parsed.num_subproblems = num_subproblems;

  const std::u32string decoded = decode_utf8(text);
  const std::u32string_view s(decoded);

  std::vector<Tag> tags;
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    if (auto tag = tag_at(s, pos)) {
      tags.push_back(*tag);
      pos = tag->end - 1;
    }
  }

  if (tags.size() != 2 * num_subproblems) return parsed;
  std::vector<AnswerBlock> blocks;
  blocks.reserve(num_subproblems);
  for (std::size_t j = 1; j <= num_subproblems; ++j) {
    const Tag& open = tags[2 * (j - 1)];
    const Tag& close = tags[2 * (j - 1) + 1];
    if (open.closing || open.index != j || !close.closing || close.index != j) {
      return parsed;
    }
    AnswerBlock block;
    block.index = j;
    block.span = CharSpan{open.end, close.begin};
    block.boxed_answer =
        extract_boxed_answer(encode_utf8(s.substr(block.span.begin, block.span.size())));
    blocks.push_back(std::move(block));
  }
  parsed.well_formed = true;
  parsed.blocks = std::move(blocks);
  return parsed;
}

std::optional<std::string> extract_boxed_answer(std::string_view text) {
  static constexpr std::string_view kOpen = "\\boxed{";
  const std::size_t start = text.rfind(kOpen);
  if (start == std::string_view::npos) return std::nullopt;

  const std::size_t content_begin = start + kOpen.size();
  int depth = 1;
  for (std::size_t i = content_begin; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(text.substr(content_begin, i - content_begin));
    }
  }
  return std::nullopt;
}

TokenSpanMap map_spans_to_tokens(const ParsedResponse& parsed,
                                 std::span<const CharSpan> token_offsets) {
  for (std::size_t t = 0; t < token_offsets.size(); ++t) {
    require(token_offsets[t].begin <= token_offsets[t].end,
            "token offset " + std::to_string(t) + " has begin > end");
    if (t > 0) {
      require(token_offsets[t].begin >= token_offsets[t - 1].end,
              "token offsets overlap or descend at token " + std::to_string(t));
    }
  }

  TokenSpanMap map;
  map.assignment.assign(token_offsets.size(), 0);
  if (!parsed.well_formed) return map;

  // Both sequences are sorted, so one forward sweep suffices.
  std::size_t b = 0;
  for (std::size_t t = 0; t < token_offsets.size(); ++t) {
    const CharSpan& tok = token_offsets[t];
    while (b < parsed.blocks.size() && parsed.blocks[b].span.end < tok.end) ++b;
    if (b == parsed.blocks.size()) break;
    if (parsed.blocks[b].span.contains(tok)) map.assignment[t] = parsed.blocks[b].index;
  }
  return map;
}

}  // namespace scrl
