#include <algorithm>

#include "depsentry/text.hpp"
#include "manifest_internal.hpp"

namespace depsentry::detail {

namespace {

std::size_t skip_string(std::string_view s, std::size_t p) {
  // p at opening quote; returns index past the closing quote
  for (++p; p < s.size(); ++p) {
    if (s[p] == '\\') {
      ++p;
      continue;
    }
    if (s[p] == '"' || s[p] == '\n') return p + 1;
  }
  return s.size();
}

std::string decode_json_string(std::string_view quoted) {
  const auto v = nlohmann::json::parse(quoted, nullptr, false);
  if (v.is_string()) return v.get<std::string>();
  if (quoted.size() >= 2) return std::string(quoted.substr(1, quoted.size() - 2));
  return std::string(quoted);
}

std::size_t skip_ws(std::string_view s, std::size_t p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t' || s[p] == '\r' || s[p] == '\n')) ++p;
  return p;
}

}  // namespace

std::vector<JsonMember> json_members(std::string_view s) {
  struct Frame {
    bool object;
    std::vector<std::string> path;
    std::optional<std::size_t> member;
  };
  std::vector<JsonMember> out;
  std::vector<Frame> stack;
  std::size_t p = 0;
  auto open = [&](char c, std::vector<std::string> path, std::optional<std::size_t> member) {
    stack.push_back({c == '{', std::move(path), member});
  };
  auto current_path = [&]() { return stack.empty() ? std::vector<std::string>{} : stack.back().path; };
  while (p < s.size()) {
    const char c = s[p];
    if (c == '"') {
      const std::size_t start = p;
      const std::size_t end = skip_string(s, p);
      const std::size_t after = skip_ws(s, end);
      if (!stack.empty() && stack.back().object && after < s.size() && s[after] == ':') {
        JsonMember m;
        m.path = current_path();
        m.path.push_back(decode_json_string(s.substr(start, end - start)));
        m.key_start = start;
        std::size_t v = skip_ws(s, after + 1);
        m.value_start = v;
        if (v < s.size() && (s[v] == '{' || s[v] == '[')) {
          out.push_back(m);
          open(s[v], m.path, out.size() - 1);
          p = v + 1;
          continue;
        }
        if (v < s.size() && s[v] == '"') {
          const std::size_t ve = skip_string(s, v);
          m.value_end = ve;
          m.string_value = decode_json_string(s.substr(v, ve - v));
          out.push_back(std::move(m));
          p = ve;
          continue;
        }
        std::size_t ve = v;
        while (ve < s.size() && s[ve] != ',' && s[ve] != '}' && s[ve] != ']' && s[ve] != '\n') ++ve;
        while (ve > v && (s[ve - 1] == ' ' || s[ve - 1] == '\t' || s[ve - 1] == '\r')) --ve;
        m.value_end = ve;
        out.push_back(std::move(m));
        p = ve;
        continue;
      }
      p = end;
      continue;
    }
    if (c == '{' || c == '[') {
      auto path = current_path();
      if (!stack.empty() && !stack.back().object) path.emplace_back("[]");
      open(c, std::move(path), std::nullopt);
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) {
        if (stack.back().member) out[*stack.back().member].value_end = p + 1;
        stack.pop_back();
      }
    }
    ++p;
  }
  return out;
}

LenientJson parse_json_lenient(std::string_view raw, std::string_view path) {
  LenientJson r;
  try {
    r.doc = nlohmann::json::parse(raw, nullptr, true, true);
    r.ok = true;
    return r;
  } catch (const nlohmann::json::parse_error& e) {
    r.error = e.what();
  }
  std::string cleaned;
  std::vector<std::uint32_t> dropped;
  std::uint32_t line = 0;
  for (const auto& l : text::split(raw, '\n')) {
    ++line;
    const std::string t = text::trim(l);
    if (t.starts_with("...") || t.starts_with("\xE2\x80\xA6")) {
      dropped.push_back(line);
      cleaned += '\n';
      continue;
    }
    cleaned += l;
    cleaned += '\n';
  }
  // trailing commas before a closer
  std::string fixed;
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    if (cleaned[i] == '"') {
      const std::size_t e = skip_string(cleaned, i);
      fixed.append(cleaned, i, e - i);
      i = e - 1;
      continue;
    }
    if (cleaned[i] == ',') {
      const std::size_t n = skip_ws(cleaned, i + 1);
      if (n < cleaned.size() && (cleaned[n] == '}' || cleaned[n] == ']')) continue;
    }
    fixed.push_back(cleaned[i]);
  }
  try {
    r.doc = nlohmann::json::parse(fixed, nullptr, true, true);
    r.ok = true;
    std::string lines;
    for (auto l : dropped) lines += (lines.empty() ? "" : ", ") + std::to_string(l);
    r.notes.push_back(std::string(path) + ": non-JSON content ignored" +
                      (lines.empty() ? std::string(" (trailing commas)") : " at line(s) " + lines));
  } catch (const nlohmann::json::parse_error&) {
    r.notes.push_back("ManifestUnparseable: " + std::string(path) + ": " + r.error);
  }
  return r;
}

std::string_view line_at(std::string_view content, std::size_t offset) {
  offset = std::min(offset, content.size());
  std::size_t b = content.rfind('\n', offset == 0 ? 0 : offset - 1);
  b = (b == std::string_view::npos || offset == 0) ? 0 : b + 1;
  if (offset > 0 && content[offset - 1] == '\n') b = offset;
  std::size_t e = content.find('\n', offset);
  if (e == std::string_view::npos) e = content.size();
  if (e > b && content[e - 1] == '\r') --e;
  return content.substr(b, e - b);
}

Located locate(std::string_view path, std::string_view content, std::size_t begin, std::size_t end,
               std::string manifest_key) {
  const text::LineIndex idx(content);
  begin = std::min(begin, content.size());
  end = std::clamp(end, begin, content.size());
  Located l;
  l.location.path = std::string(path);
  l.location.byte_start = begin;
  l.location.byte_end = end;
  l.location.line_start = idx.line_of(begin);
  l.location.line_end = idx.line_of(end > begin ? end - 1 : begin);
  l.manifest_key = std::move(manifest_key);
  l.evidence = clip_evidence(content.substr(begin, end - begin));
  return l;
}

Located locate_tokens(std::string_view path, std::string_view content, const lex::Token& first,
                      const lex::Token& last, std::string manifest_key) {
  return locate(path, content, first.span.byte_start, last.span.byte_end, std::move(manifest_key));
}

bool in_test_tree(std::string_view rel) {
  for (const auto& seg : text::split(text::dirname(rel), '/')) {
    const std::string s = text::to_lower(seg);
    if (s == "test" || s == "tests" || s == "spec" || s == "specs" || s == "__tests__" ||
        s == "testdata" || s == "testing")
      return true;
  }
  const std::string base = text::to_lower(text::basename(rel));
  return base.ends_with("_test.go") || base.starts_with("test_") || base.ends_with("_test.py") ||
         base.ends_with(".test.js") || base.ends_with(".spec.js") || base.ends_with("_spec.rb") ||
         base.ends_with("_test.rb");
}

}  // namespace depsentry::detail
