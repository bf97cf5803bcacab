#include "czlm/heads/edit_script.hpp"

#include <algorithm>
#include <charconv>

#include "czlm/utf8.hpp"

namespace czlm::heads {

namespace {

// Longest common substring; leftmost in the form, then leftmost in the lemma.
struct Common {
  std::size_t form_start = 0, lemma_start = 0, length = 0;
};

Common longest_common_substring(const std::u32string& a, const std::u32string& b) {
  Common best;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      if (cur[j] > best.length) best = {i - cur[j], j - cur[j], cur[j]};
    }
    std::swap(prev, cur);
  }
  return best;
}

std::vector<EditOp> replace_program(std::size_t deleted, const std::u32string& inserted) {
  std::vector<EditOp> ops;
  if (deleted) ops.push_back({EditOp::Kind::Delete, deleted, {}});
  if (!inserted.empty()) ops.push_back({EditOp::Kind::Insert, 0, inserted});
  return ops;
}

std::vector<CaseOp> casing_of(const std::u32string& lemma) {
  std::vector<CaseOp> ops;
  Case state = Case::Lower;
  for (std::size_t i = 0; i < lemma.size(); ++i) {
    Case c;
    if (utf8::is_upper(lemma[i]))
      c = Case::Upper;
    else if (utf8::is_lower(lemma[i]))
      c = Case::Lower;
    else
      continue;
    if (c != state) {
      ops.push_back({i, c});
      state = c;
    }
  }
  return ops;
}

std::size_t consumed(const std::vector<EditOp>& program) {
  std::size_t n = 0;
  for (const auto& op : program)
    if (op.kind != EditOp::Kind::Insert) n += op.count;
  return n;
}

void run(const std::vector<EditOp>& program, const std::u32string& in, std::size_t& pos, std::u32string& out) {
  for (const auto& op : program) {
    switch (op.kind) {
      case EditOp::Kind::Keep: out.append(in, pos, op.count); pos += op.count; break;
      case EditOp::Kind::Delete: pos += op.count; break;
      case EditOp::Kind::Insert: out += op.text; break;
    }
  }
}

void put_program(std::string& out, const std::vector<EditOp>& program) {
  for (const auto& op : program) {
    switch (op.kind) {
      case EditOp::Kind::Keep: out += "k" + std::to_string(op.count); break;
      case EditOp::Kind::Delete: out += "d" + std::to_string(op.count); break;
      case EditOp::Kind::Insert: {
        const auto bytes = utf8::encode(op.text);
        out += "i" + std::to_string(bytes.size()) + ":" + bytes;
        break;
      }
    }
  }
}

class ScriptReader {
 public:
  explicit ScriptReader(const std::string& s) : s_(s) {}
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  char get() {
    if (at_end()) fail();
    return s_[pos_++];
  }
  void expect(char c) {
    if (get() != c) fail();
  }
  std::size_t number() {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail();
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }
  std::string take(std::size_t n) {
    if (pos_ + n > s_.size()) fail();
    auto out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  [[noreturn]] void fail() const { throw EditScriptError("malformed edit script '" + s_ + "'"); }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

std::vector<EditOp> read_program(ScriptReader& in) {
  std::vector<EditOp> ops;
  while (!in.at_end() && in.peek() != '|') {
    const char k = in.get();
    if (k == 'k') {
      ops.push_back({EditOp::Kind::Keep, in.number(), {}});
    } else if (k == 'd') {
      ops.push_back({EditOp::Kind::Delete, in.number(), {}});
    } else if (k == 'i') {
      const auto n = in.number();
      in.expect(':');
      ops.push_back({EditOp::Kind::Insert, 0, utf8::decode(in.take(n))});
    } else {
      in.fail();
    }
  }
  return ops;
}

}  // namespace

std::string EditScript::to_string() const {
  std::string out = absolute ? "A" : "R";
  out += "|";
  for (std::size_t i = 0; i < casing.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(casing[i].position) + (casing[i].target == Case::Upper ? "U" : "L");
  }
  out += "|";
  put_program(out, prefix);
  out += "|";
  put_program(out, suffix);
  return out;
}

EditScript EditScript::parse(const std::string& text) {
  ScriptReader in(text);
  EditScript s;
  const char mode = in.get();
  if (mode != 'A' && mode != 'R') in.fail();
  s.absolute = mode == 'A';
  in.expect('|');
  while (in.peek() != '|') {
    CaseOp op;
    op.position = in.number();
    const char c = in.get();
    if (c != 'U' && c != 'L') in.fail();
    op.target = c == 'U' ? Case::Upper : Case::Lower;
    s.casing.push_back(op);
    if (in.peek() == ',') in.get();
  }
  in.expect('|');
  s.prefix = read_program(in);
  in.expect('|');
  s.suffix = read_program(in);
  if (!in.at_end()) in.fail();
  return s;
}

EditScript derive_edit_script(const std::string& form, const std::string& lemma) {
  if (form.empty() || lemma.empty()) throw std::invalid_argument("edit scripts need a non-empty form and lemma");
  const auto f = utf8::to_lower(utf8::decode(form));
  const auto raw_lemma = utf8::decode(lemma);
  const auto l = utf8::to_lower(raw_lemma);

  EditScript script;
  const auto common = longest_common_substring(f, l);
  if (common.length > 0) {
    script.casing = casing_of(raw_lemma);
    script.prefix = replace_program(common.form_start, l.substr(0, common.lemma_start));
    const std::size_t f_tail = f.size() - common.form_start - common.length;
    script.suffix = replace_program(f_tail, l.substr(common.lemma_start + common.length));
    if (apply_edit_script(form, script) == lemma) return script;
  }
  // Nothing shared, or the case mapping does not round-trip: spell the lemma out.
  EditScript fallback;
  fallback.absolute = true;
  fallback.prefix = {{EditOp::Kind::Insert, 0, raw_lemma}};
  return fallback;
}

std::string apply_edit_script(const std::string& form, const EditScript& script) {
  if (script.absolute) {
    std::u32string out;
    for (const auto& op : script.prefix)
      if (op.kind == EditOp::Kind::Insert) out += op.text;
    return utf8::encode(out);
  }
  const auto f = utf8::to_lower(utf8::decode(form));
  const std::size_t head = consumed(script.prefix), tail = consumed(script.suffix);
  if (head + tail > f.size())
    throw EditScriptError("edit script consumes " + std::to_string(head + tail) + " characters of a " +
                          std::to_string(f.size()) + "-character form");
  std::u32string out;
  std::size_t pos = 0;
  run(script.prefix, f, pos, out);
  out.append(f, head, f.size() - head - tail);
  pos = f.size() - tail;
  run(script.suffix, f, pos, out);

  Case state = Case::Lower;
  std::size_t next = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    while (next < script.casing.size() && script.casing[next].position <= i) state = script.casing[next++].target;
    out[i] = state == Case::Upper ? utf8::to_upper(out[i]) : utf8::to_lower(out[i]);
  }
  return utf8::encode(out);
}

LemmaInventory LemmaInventory::build(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("lemma inventory needs at least one pair");
  std::vector<EditScript> order;
  std::map<EditScript, std::pair<std::size_t, std::size_t>> seen;  // count, first occurrence
  for (const auto& [form, lemma] : pairs) {
    auto script = derive_edit_script(form, lemma);
    auto [it, inserted] = seen.try_emplace(script, 0, order.size());
    if (inserted) order.push_back(script);
    ++it->second.first;
  }
  std::stable_sort(order.begin(), order.end(), [&](const EditScript& a, const EditScript& b) {
    return seen.at(a).first > seen.at(b).first;
  });
  LemmaInventory inv;
  for (const auto& s : order) {
    inv.index_.emplace(s, inv.scripts_.size());
    inv.scripts_.push_back(s);
    inv.counts_.push_back(seen.at(s).first);
  }
  return inv;
}

long LemmaInventory::find(const EditScript& script) const {
  auto it = index_.find(script);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

}  // namespace czlm::heads
