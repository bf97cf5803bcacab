#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "czlm/corpus.hpp"

namespace czlm::heads {

class IllNestedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Outermost first: by start, then longer spans, then label.
void sort_nested(std::vector<EntitySpan>& spans);

// Per-token label stacks (1-based spans over n tokens). Throws IllNestedError on crossing spans.
std::vector<std::vector<std::string>> encode_nested(const std::vector<EntitySpan>& spans, std::size_t n);
std::vector<EntitySpan> decode_nested(const std::vector<std::vector<std::string>>& stacks);

// One string per token: stack joined with '|', "O" when empty.
std::string join_stack(const std::vector<std::string>& stack);
std::vector<std::string> split_stack(std::string_view label);

// Flat BIO over non-overlapping spans; overlapping spans are rejected.
std::vector<std::string> encode_bio(const std::vector<EntitySpan>& spans, std::size_t n);
// Lenient: an I-X that does not continue an X entity starts one.
std::vector<EntitySpan> decode_bio(const std::vector<std::string>& tags);

// Sidecar lines `start<TAB>end<TAB>type`.
std::vector<EntitySpan> parse_span_list(std::string_view text);
std::string format_span_list(const std::vector<EntitySpan>& spans);

}  // namespace czlm::heads
