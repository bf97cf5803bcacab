#include "czlm/heads/ner.hpp"

#include <algorithm>
#include <charconv>

namespace czlm::heads {

namespace {

bool begins(const std::string& tag) { return tag.rfind("B-", 0) == 0; }
bool inside(const std::string& tag) { return tag.rfind("I-", 0) == 0; }

void check_bounds(const std::vector<EntitySpan>& spans, std::size_t n) {
  for (const auto& s : spans)
    if (s.start < 1 || s.start > s.end || s.end > static_cast<int>(n))
      throw std::invalid_argument("span (" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                                  ") outside a " + std::to_string(n) + "-token sentence");
}

}  // namespace

void sort_nested(std::vector<EntitySpan>& spans) {
  std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    return a.label < b.label;
  });
}

std::vector<std::vector<std::string>> encode_nested(const std::vector<EntitySpan>& spans, std::size_t n) {
  check_bounds(spans, n);
  auto sorted = spans;
  sort_nested(sorted);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size() && sorted[j].start <= sorted[i].end; ++j)
      if (sorted[j].end > sorted[i].end)
        throw IllNestedError("spans (" + std::to_string(sorted[i].start) + ", " + std::to_string(sorted[i].end) +
                             ") and (" + std::to_string(sorted[j].start) + ", " + std::to_string(sorted[j].end) +
                             ") cross");
  std::vector<std::vector<std::string>> stacks(n);
  for (const auto& s : sorted)
    for (int t = s.start; t <= s.end; ++t)
      stacks[static_cast<std::size_t>(t - 1)].push_back((t == s.start ? "B-" : "I-") + s.label);
  return stacks;
}

std::vector<EntitySpan> decode_nested(const std::vector<std::vector<std::string>>& stacks) {
  std::vector<EntitySpan> done;
  std::vector<EntitySpan> open;  // one per depth
  for (std::size_t t = 0; t < stacks.size(); ++t) {
    const auto& stack = stacks[t];
    std::size_t depth = 0;
    for (; depth < stack.size(); ++depth) {
      const auto& tag = stack[depth];
      const bool continues = inside(tag) && depth < open.size() && open[depth].label == tag.substr(2);
      if (!continues) break;
      open[depth].end = static_cast<int>(t) + 1;
    }
    while (open.size() > depth) {
      done.push_back(open.back());
      open.pop_back();
    }
    for (; depth < stack.size(); ++depth) {
      const auto& tag = stack[depth];
      const std::string label = begins(tag) || inside(tag) ? tag.substr(2) : tag;
      open.push_back({static_cast<int>(t) + 1, static_cast<int>(t) + 1, label});
    }
  }
  done.insert(done.end(), open.begin(), open.end());
  sort_nested(done);
  return done;
}

std::string join_stack(const std::vector<std::string>& stack) {
  if (stack.empty()) return "O";
  std::string out;
  for (std::size_t i = 0; i < stack.size(); ++i) out += (i ? "|" : "") + stack[i];
  return out;
}

std::vector<std::string> split_stack(std::string_view label) {
  std::vector<std::string> out;
  if (label == "O" || label.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto bar = label.find('|', start);
    out.emplace_back(label.substr(start, bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

std::vector<std::string> encode_bio(const std::vector<EntitySpan>& spans, std::size_t n) {
  check_bounds(spans, n);
  std::vector<std::string> tags(n, "O");
  for (const auto& s : spans)
    for (int t = s.start; t <= s.end; ++t) {
      auto& tag = tags[static_cast<std::size_t>(t - 1)];
      if (tag != "O") throw IllNestedError("flat BIO cannot encode overlapping spans");
      tag = (t == s.start ? "B-" : "I-") + s.label;
    }
  return tags;
}

std::vector<EntitySpan> decode_bio(const std::vector<std::string>& tags) {
  std::vector<std::vector<std::string>> stacks;
  for (const auto& t : tags) stacks.push_back(t == "O" ? std::vector<std::string>{} : std::vector<std::string>{t});
  return decode_nested(stacks);
}

std::vector<EntitySpan> parse_span_list(std::string_view text) {
  std::vector<EntitySpan> spans;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    EntitySpan s;
    bool ok = t2 != std::string_view::npos;
    if (ok) {
      auto a = std::from_chars(line.data(), line.data() + t1, s.start);
      auto b = std::from_chars(line.data() + t1 + 1, line.data() + t2, s.end);
      ok = a.ec == std::errc{} && a.ptr == line.data() + t1 && b.ec == std::errc{} && b.ptr == line.data() + t2;
      s.label = std::string(line.substr(t2 + 1));
    }
    if (!ok || s.label.empty()) throw ParseError(line_no, "expected start<TAB>end<TAB>type");
    spans.push_back(std::move(s));
  }
  return spans;
}

std::string format_span_list(const std::vector<EntitySpan>& spans) {
  std::string out;
  for (const auto& s : spans) out += std::to_string(s.start) + "\t" + std::to_string(s.end) + "\t" + s.label + "\n";
  return out;
}

}  // namespace czlm::heads
