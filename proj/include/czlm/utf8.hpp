#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace czlm::utf8 {

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Byte offset of the first ill-formed sequence, if any.
std::optional<std::size_t> first_invalid(std::string_view bytes);

void validate(std::string_view bytes);

std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

// Replaces every ill-formed subsequence with U+FFFD. Identity on valid input.
std::string sanitize(std::string_view bytes);

std::size_t length(std::string_view bytes);

// Simple one-to-one case mapping for Latin, Greek and Cyrillic letters.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);

std::u32string to_lower(std::u32string_view text);
std::string to_lower(std::string_view bytes);

bool is_space(unsigned char c);

}  // namespace czlm::utf8
