#pragma once

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace czlm::heads {

struct EditOp {
  enum class Kind { Keep, Delete, Insert };
  Kind kind = Kind::Keep;
  std::size_t count = 0;  // Keep / Delete
  std::u32string text;    // Insert

  auto operator<=>(const EditOp&) const = default;
};

enum class Case { Lower, Upper };

// From `position` (a code point index into the lemma) on, characters take `target` case.
struct CaseOp {
  std::size_t position = 0;
  Case target = Case::Lower;

  auto operator<=>(const CaseOp&) const = default;
};

// Prefix and suffix programs run over the lowercased form; the untouched middle is
// copied. Casing ops are then applied to the result. An absolute script ignores the
// form and produces `prefix`'s inserted text verbatim.
struct EditScript {
  std::vector<CaseOp> casing;
  std::vector<EditOp> prefix;
  std::vector<EditOp> suffix;
  bool absolute = false;

  auto operator<=>(const EditScript&) const = default;

  bool is_identity() const { return !absolute && casing.empty() && prefix.empty() && suffix.empty(); }
  // Canonical text form; equal scripts give equal strings.
  std::string to_string() const;
  static EditScript parse(const std::string& text);
};

class EditScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EditScript derive_edit_script(const std::string& form, const std::string& lemma);
std::string apply_edit_script(const std::string& form, const EditScript& script);

class LemmaInventory {
 public:
  // Categories ordered by descending frequency, then first occurrence.
  static LemmaInventory build(const std::vector<std::pair<std::string, std::string>>& pairs);

  std::size_t size() const { return scripts_.size(); }
  const EditScript& script(std::size_t id) const { return scripts_.at(id); }
  std::size_t frequency(std::size_t id) const { return counts_.at(id); }
  // Category id of a script, or -1 when unseen.
  long find(const EditScript& script) const;

 private:
  std::vector<EditScript> scripts_;
  std::vector<std::size_t> counts_;
  std::map<EditScript, std::size_t> index_;
};

}  // namespace czlm::heads
