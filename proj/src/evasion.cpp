#include "depsentry/evasion.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <map>
#include <set>

#include "depsentry/text.hpp"

namespace depsentry {

namespace {

using lex::Token;
using lex::TokenKind;

lex::Span join(const lex::Span& a, const lex::Span& b) {
  return lex::Span{a.byte_start, b.byte_end, a.line_start, b.line_end};
}

std::string_view slice(std::string_view content, const lex::Span& s) {
  if (s.byte_start >= content.size()) return {};
  return content.substr(s.byte_start, std::min<std::uint64_t>(s.byte_end, content.size()) - s.byte_start);
}

Finding finding_at(TechniqueId id, const AnalyzedFile& f, const lex::Span& span, std::string message) {
  return make_finding(id, lex::to_source_span(f.path, span), slice(f.content, span), std::move(message));
}

std::string preview(std::string_view bytes) {
  std::string out;
  for (unsigned char c : bytes.substr(0, kMaxEvidence)) {
    if (c >= 0x20 && c < 0x7F) {
      out += static_cast<char>(c);
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += '.';
    }
  }
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_base64_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/';
}

bool has_class(const AnalyzedFile& f, std::size_t i, std::initializer_list<ApiClass> classes) {
  return std::find(classes.begin(), classes.end(), f.calls[i].api_class) != classes.end();
}

std::uint32_t line_of(const AnalyzedFile& f, const ApiCall& c) {
  return f.stream.tokens[c.token].span.line_start;
}

bool within(std::uint32_t a, std::uint32_t b, int window) {
  return (a > b ? a - b : b - a) <= static_cast<std::uint32_t>(window);
}

std::string preview_text(std::string_view decoded) {
  std::string out(decoded.substr(0, kMaxEvidence));
  text::sanitize_utf8(out);
  return clip_evidence(out);
}

}  // namespace

std::string_view to_string(CharsetClass c) {
  switch (c) {
    case CharsetClass::Base64Like: return "base64-like";
    case CharsetClass::HexLike: return "hex-like";
    case CharsetClass::Printable: return "printable";
    case CharsetClass::Mixed: return "mixed";
    case CharsetClass::BinaryIsh: return "binary-ish";
  }
  return "mixed";
}

double shannon_entropy(std::string_view bytes) {
  if (bytes.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : bytes) ++counts[c];
  const double n = static_cast<double>(bytes.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return std::clamp(h, 0.0, 8.0);
}

std::optional<std::string> decode_base64(std::string_view text) {
  std::string compact;
  for (char c : text)
    if (!is_space(c)) compact += c;
  if (compact.empty() || compact.size() % 4 != 0) return std::nullopt;
  std::size_t pad = 0;
  while (pad < 2 && pad < compact.size() && compact[compact.size() - 1 - pad] == '=') ++pad;
  for (std::size_t i = 0; i + pad < compact.size(); ++i)
    if (!is_base64_char(compact[i])) return std::nullopt;
  std::string out(compact.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(compact.data()),
                                static_cast<int>(compact.size()));
  if (n < 0) return std::nullopt;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::optional<std::string> decode_hex(std::string_view text) {
  if (text.empty() || text.size() % 2 != 0) return std::nullopt;
  std::string out;
  out.reserve(text.size() / 2);
  auto nibble = [](char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return c - 'A' + 10;
  };
  for (std::size_t i = 0; i < text.size(); i += 2) {
    if (!is_hex_digit(text[i]) || !is_hex_digit(text[i + 1])) return std::nullopt;
    out += static_cast<char>(nibble(text[i]) << 4 | nibble(text[i + 1]));
  }
  return out;
}

StringClassification classify_literal(std::string_view literal, const Thresholds& t) {
  StringClassification c;
  c.literal = std::string(literal);
  c.entropy_bits_per_byte = shannon_entropy(literal);
  const bool whitespace = std::any_of(literal.begin(), literal.end(), is_space);

  std::optional<std::string> decoded;
  if (literal.size() >= t.encoded_min_length && !whitespace) {
    if (auto hex = decode_hex(literal)) {
      decoded = std::move(hex);
      c.charset_class = CharsetClass::HexLike;
      if (text::printable_fraction(*decoded) < t.printable_fraction_min) {
        // Hex digits are valid base64 too; keep whichever decoding reads as text.
        if (auto b64 = decode_base64(literal); b64 && text::printable_fraction(*b64) >= t.printable_fraction_min) {
          decoded = std::move(b64);
          c.charset_class = CharsetClass::Base64Like;
        }
      }
    }
  }
  if (!decoded) {
    std::size_t b64_chars = 0;
    for (char ch : literal) b64_chars += is_space(ch) ? 0 : 1;
    if (b64_chars >= t.encoded_min_length) {
      if (auto b64 = decode_base64(literal)) {
        decoded = std::move(b64);
        c.charset_class = CharsetClass::Base64Like;
      }
    }
  }
  if (decoded) {
    c.decoded_preview = *decoded;
    c.encoded = !decoded->empty() && text::printable_fraction(*decoded) >= t.printable_fraction_min;
  } else {
    const double pf = text::printable_fraction(literal);
    c.charset_class = pf >= 0.999 ? CharsetClass::Printable
                      : pf >= t.printable_fraction_min ? CharsetClass::Mixed
                                                       : CharsetClass::BinaryIsh;
  }
  if (!c.encoded && literal.size() >= t.opaque_min_length && (t.opaque_allow_whitespace || !whitespace)) {
    const double h = decoded ? shannon_entropy(*decoded) : c.entropy_bits_per_byte;
    c.opaque = h >= t.entropy_min;
  }
  return c;
}

std::vector<Finding> classify_strings(const AnalyzedFile& f, const Thresholds& t) {
  std::vector<Finding> out;
  for (const auto& tok : f.stream.tokens) {
    if (tok.kind != TokenKind::StringLiteral || !tok.interpolations.empty()) continue;
    if (tok.text.size() < std::min(t.encoded_min_length, t.opaque_min_length)) continue;
    const StringClassification c = classify_literal(tok.text, t);
    if (c.encoded) {
      Finding fd = finding_at(TechniqueId::EvDoEnc, f, tok.span,
                              std::string(to_string(c.charset_class)) + " string decodes to text");
      fd.properties.emplace_back("decoded_preview", preview_text(*c.decoded_preview));
      fd.properties.emplace_back("charset_class", std::string(to_string(c.charset_class)));
      out.push_back(std::move(fd));
    } else if (c.opaque) {
      Finding fd = finding_at(TechniqueId::EvDoCry, f, tok.span, "opaque high-entropy string");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", c.entropy_bits_per_byte);
      fd.properties.emplace_back("entropy", buf);
      fd.properties.emplace_back("charset_class", std::string(to_string(c.charset_class)));
      out.push_back(std::move(fd));
    }
  }
  return out;
}

std::vector<Finding> detect_pack_and_exec(const AnalyzedFile& f, const Thresholds& t) {
  std::vector<Finding> out;
  const auto& toks = f.stream.tokens;
  // Identifiers assigned from a decode-family call: name -> call index.
  std::map<std::string, std::size_t> decoded_names;
  for (std::size_t i = 0; i < f.calls.size(); ++i) {
    if (!has_class(f, i, {ApiClass::Decode, ApiClass::Decompress, ApiClass::Decrypt})) continue;
    const std::size_t first = f.calls[i].first;
    if (first > 0 && toks[first - 1].kind == TokenKind::Assignment) {
      std::string name = toks[first - 1].detail;
      if (!name.empty() && name.front() == '$') name.erase(0, 1);
      decoded_names.emplace(name, i);
    }
  }

  for (std::size_t e = 0; e < f.calls.size(); ++e) {
    const ApiCall& ev = f.calls[e];
    if (ev.api_class != ApiClass::CodeEval || !ev.is_call) continue;
    const std::uint32_t line = line_of(f, ev);
    std::optional<std::size_t> nested, via_name, nearby;
    for (std::size_t d = 0; d < f.calls.size(); ++d) {
      if (!has_class(f, d, {ApiClass::Decode, ApiClass::Decompress, ApiClass::Decrypt})) continue;
      const ApiCall& dc = f.calls[d];
      if (dc.token > ev.args_open && dc.token < ev.args_close) {
        nested = d;
        break;
      }
      if (within(line_of(f, dc), line, t.proximity_lines) && !nearby) nearby = d;
    }
    if (!nested) {
      for (std::size_t k = ev.args_open + 1; k < ev.args_close && k < toks.size(); ++k) {
        if (toks[k].kind != TokenKind::Identifier) continue;
        std::string name = toks[k].text;
        if (!name.empty() && name.front() == '$') name.erase(0, 1);
        auto it = decoded_names.find(name);
        if (it != decoded_names.end() && within(line_of(f, f.calls[it->second]), line, t.proximity_lines)) {
          via_name = it->second;
          break;
        }
      }
    }
    const auto src = nested ? nested : via_name ? via_name : nearby;
    if (!src) continue;
    const ApiCall& dc = f.calls[*src];
    Finding fd = make_finding(TechniqueId::EvDyPack, f.call_span(ev), f.call_text(ev),
                              ev.chain + " executes code near " + dc.chain);
    fd.confidence = nested || via_name ? Confidence::Strong : Confidence::Moderate;
    fd.properties.emplace_back("decoder", dc.chain);
    out.push_back(std::move(fd));
  }

  for (const auto& dc : f.calls) {
    if (dc.api_class != ApiClass::Decompress || !dc.is_call) continue;
    bool embedded = false;
    for (std::size_t k = dc.args_open + 1; k < dc.args_close && k < toks.size(); ++k)
      embedded = embedded || toks[k].kind == TokenKind::StringLiteral || toks[k].kind == TokenKind::NumberArray;
    for (const auto& inner : f.calls)
      embedded = embedded || (inner.api_class == ApiClass::Decode && inner.token > dc.args_open &&
                              inner.token < dc.args_close);
    if (!embedded) continue;
    out.push_back(make_finding(TechniqueId::EvDoCmp, f.call_span(dc), f.call_text(dc),
                               dc.chain + " decompresses data embedded in the source"));
  }
  return out;
}

bool is_sensitive_shape(std::string_view value, const SensitiveLists& s) {
  const std::string lower = text::to_lower(value);
  for (const auto& p : s.url_prefixes)
    if (lower.starts_with(p)) return true;
  for (const auto& p : s.credential_paths)
    if (value.find(p) != std::string_view::npos) return true;
  const std::string trimmed = text::trim(value);
  std::string first = trimmed.substr(0, trimmed.find_first_of(" \t"));
  first = std::string(text::basename(first));
  for (const auto& w : s.shell_words)
    if (first == w) return true;
  return false;
}

std::vector<AssembledString> assembled_strings(const AnalyzedFile& f, const Thresholds& t) {
  std::vector<AssembledString> out;
  const auto& toks = f.stream.tokens;
  const std::string_view plus = f.stream.language == Language::PHP ? "." : "+";
  auto short_literal = [&](const Token& tok) {
    return tok.kind == TokenKind::StringLiteral && tok.interpolations.empty() &&
           tok.text.size() <= t.split_max_piece_length;
  };

  // "a" + "b" + "c" + "d"
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!short_literal(toks[i])) continue;
    AssembledString a{toks[i].text, 1, i, i};
    std::size_t k = i;
    while (k + 2 < toks.size() && toks[k + 1].is_punct(plus) && short_literal(toks[k + 2])) {
      a.value += toks[k + 2].text;
      ++a.pieces;
      k += 2;
    }
    if (a.pieces >= t.split_min_pieces) {
      a.last_token = k;
      out.push_back(std::move(a));
      i = k;
    }
  }

  // ["a", "b", "c", "d"] joined
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].is_punct("[")) continue;
    const std::size_t close = lex::matching_close(toks, i);
    if (close >= toks.size()) continue;
    AssembledString a{{}, 0, i, close};
    bool only_literals = true;
    for (std::size_t k = i + 1; k < close && only_literals; ++k) {
      if (short_literal(toks[k])) {
        a.value += toks[k].text;
        ++a.pieces;
      } else if (!toks[k].is_punct(",")) {
        only_literals = false;
      }
    }
    if (!only_literals || a.pieces < t.split_min_pieces) continue;
    const bool join_after = close + 2 < toks.size() && toks[close + 1].is_punct(".") &&
                            toks[close + 2].kind == TokenKind::Identifier && toks[close + 2].text == "join";
    const bool join_before = i >= 2 && toks[i - 1].is_punct("(") && toks[i - 2].kind == TokenKind::Identifier &&
                             (toks[i - 2].text == "join" || toks[i - 2].text == "implode");
    if (join_after || join_before) out.push_back(std::move(a));
  }

  // x = "a"; x += "b"; ... within the window
  std::map<std::string, AssembledString> acc;
  auto single_literal_rhs = [&](std::size_t a) -> const Token* {
    if (a + 1 >= toks.size() || !short_literal(toks[a + 1])) return nullptr;
    if (a + 2 < toks.size() && toks[a + 2].span.line_start == toks[a + 1].span.line_end &&
        !toks[a + 2].is_punct(";") && toks[a + 2].kind != TokenKind::Comment)
      return nullptr;
    return &toks[a + 1];
  };
  auto flush = [&](const std::string& name) {
    auto it = acc.find(name);
    if (it == acc.end()) return;
    if (it->second.pieces >= t.split_min_pieces) out.push_back(it->second);
    acc.erase(it);
  };
  for (std::size_t a = 0; a < toks.size(); ++a) {
    if (toks[a].kind != TokenKind::Assignment) continue;
    const std::string& name = toks[a].detail;
    const bool append = toks[a].text == "+=" || toks[a].text == ".=" || toks[a].text == "<<";
    const Token* lit = single_literal_rhs(a);
    std::size_t self_concat = 0;
    if (!lit && toks[a].text == "=" && a + 3 < toks.size() && toks[a + 1].kind == TokenKind::Identifier &&
        toks[a + 1].text == name && toks[a + 2].is_punct(plus) && short_literal(toks[a + 3]))
      self_concat = a + 3;
    auto it = acc.find(name);
    if (it != acc.end() && !within(toks[a].span.line_start, toks[it->second.first_token].span.line_start,
                                   t.split_window_lines)) {
      flush(name);
      it = acc.end();
    }
    if ((append && lit) || self_concat) {
      const Token& piece = self_concat ? toks[self_concat] : *lit;
      if (it == acc.end()) continue;
      it->second.value += piece.text;
      ++it->second.pieces;
      it->second.last_token = self_concat ? self_concat : a + 1;
    } else if (toks[a].text == "=" && lit) {
      flush(name);
      acc[name] = AssembledString{lit->text, 1, a > 0 ? a - 1 : a, a + 1};
    } else {
      flush(name);
    }
  }
  std::vector<std::string> names;
  for (const auto& [n, _] : acc) names.push_back(n);
  for (const auto& n : names) flush(n);

  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first_token < y.first_token; });
  return out;
}

std::vector<Finding> detect_concat_assembly(const AnalyzedFile& f, const Config& config) {
  std::vector<Finding> out;
  const auto& toks = f.stream.tokens;
  for (const auto& a : assembled_strings(f, config.thresholds())) {
    if (!is_sensitive_shape(a.value, config.sensitive())) continue;
    Finding fd = finding_at(TechniqueId::EvDoSplit, f, join(toks[a.first_token].span, toks[a.last_token].span),
                            std::to_string(a.pieces) + " string pieces join to \"" + preview(a.value) + "\"");
    fd.properties.emplace_back("joined", preview(a.value));
    out.push_back(std::move(fd));
  }
  return out;
}

namespace {

std::vector<std::string> sensitive_words(const SensitiveLists& s, std::size_t min_len) {
  std::vector<std::string> words;
  for (const auto* list : {&s.shell_words, &s.url_prefixes, &s.credential_paths})
    for (const auto& w : *list)
      if (w.size() >= min_len) words.push_back(w);
  return words;
}

}  // namespace

std::vector<Finding> detect_binary_array_payload(const AnalyzedFile& f, const Config& config) {
  std::vector<Finding> out;
  const Thresholds& t = config.thresholds();
  const auto words = sensitive_words(config.sensitive(), t.xor_word_min_length);
  for (const auto& tok : f.stream.tokens) {
    if (tok.kind != TokenKind::NumberArray || tok.values.size() < t.binary_array_min_length) continue;
    std::string bytes;
    bool ok = true;
    for (std::int64_t v : tok.values) {
      if (v < 0 && v >= -128 && f.stream.language == Language::Java) v += 256;
      if (v < 0 || v > 255) {
        ok = false;
        break;
      }
      bytes += static_cast<char>(v);
    }
    if (!ok) continue;

    std::optional<int> key;
    std::string decoded;
    for (int k = 1; k < 256 && !key; ++k) {
      std::string x = bytes;
      for (auto& c : x) c = static_cast<char>(static_cast<unsigned char>(c) ^ k);
      if (text::printable_fraction(x) < t.printable_fraction_min) continue;
      for (const auto& w : words) {
        if (x.find(w) != std::string::npos) {
          key = k;
          decoded = std::move(x);
          break;
        }
      }
    }
    if (key) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%02x", *key);
      Finding fd = finding_at(TechniqueId::EvDoBin, f, tok.span,
                              "byte array XOR " + std::string(buf) + " decodes to \"" + preview(decoded) + "\"");
      fd.confidence = Confidence::Weak;
      fd.properties.emplace_back("decoded_preview", preview(decoded));
      fd.properties.emplace_back("xor_key", buf);
      out.push_back(std::move(fd));
    } else if (text::printable_fraction(bytes) >= t.printable_fraction_min) {
      Finding fd = finding_at(TechniqueId::EvDoBin, f, tok.span, "byte array decodes to \"" + preview(bytes) + "\"");
      fd.properties.emplace_back("decoded_preview", preview(bytes));
      out.push_back(std::move(fd));
    }
  }
  return out;
}

bool looks_renamed(std::string_view id, const Thresholds& t) {
  if (id.size() < t.identifier_min_length) return false;
  std::set<char> distinct(id.begin(), id.end());
  if (distinct.size() <= t.identifier_max_distinct) return true;
  static constexpr std::string_view kConfusable = "l1I_O0";
  std::size_t run = 0;
  std::set<char> run_chars;
  while (run < id.size() && kConfusable.find(id[run]) != std::string_view::npos) run_chars.insert(id[run++]);
  return run >= 3 && run_chars.size() >= 2;
}

IdentifierScore identifier_score(const lex::TokenStream& stream, const Thresholds& t) {
  IdentifierScore s;
  std::set<std::string> imported;
  for (const auto& tok : stream.tokens) {
    if (tok.kind != TokenKind::ImportStmt) continue;
    for (const auto& p : tok.parts) {
      imported.insert(p.substr(0, p.find('=')));
      if (auto eq = p.find('='); eq != std::string::npos) imported.insert(p.substr(eq + 1));
    }
  }
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
    const auto& tok = stream.tokens[i];
    if (tok.kind != TokenKind::Identifier || tok.text.size() < t.identifier_min_length) continue;
    if (imported.contains(tok.text)) continue;
    first_seen.emplace(tok.text, i);
  }
  std::size_t renamed = 0;
  for (const auto& [id, idx] : first_seen) {
    if (looks_renamed(id, t)) {
      ++renamed;
      s.flagged_tokens.push_back(idx);
    }
  }
  std::sort(s.flagged_tokens.begin(), s.flagged_tokens.end());
  s.scored = first_seen.size();
  s.score = s.scored ? static_cast<double>(renamed) / static_cast<double>(s.scored) : 0.0;
  return s;
}

std::vector<Finding> detect_identifier_obfuscation(const AnalyzedFile& f, const Thresholds& t) {
  const IdentifierScore s = identifier_score(f.stream, t);
  if (s.scored < t.identifier_min_count || s.score < t.identifier_score_min || s.flagged_tokens.empty())
    return {};
  const Token& tok = f.stream.tokens[s.flagged_tokens.front()];
  const std::string_view line = [&] {
    const std::size_t b = f.content.rfind('\n', tok.span.byte_start);
    const std::size_t start = b == std::string_view::npos ? 0 : b + 1;
    const std::size_t e = f.content.find('\n', tok.span.byte_start);
    return f.content.substr(start, (e == std::string_view::npos ? f.content.size() : e) - start);
  }();
  const std::uint64_t start = static_cast<std::uint64_t>(line.data() - f.content.data());
  const lex::Span span{start, start + line.size(), tok.span.line_start, tok.span.line_start};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", s.score);
  Finding fd = finding_at(TechniqueId::EvStId, f, span,
                          std::to_string(s.flagged_tokens.size()) + " of " + std::to_string(s.scored) +
                              " identifiers look machine-renamed");
  fd.properties.emplace_back("score", buf);
  std::string sample;
  for (std::size_t i = 0; i < s.flagged_tokens.size() && i < 5; ++i)
    sample += (i ? ", " : "") + f.stream.tokens[s.flagged_tokens[i]].text;
  fd.properties.emplace_back("identifiers", sample);
  return {fd};
}

std::vector<Finding> detect_visual_deception(std::string_view path, std::string_view content,
                                             const Thresholds& t) {
  std::size_t line_start = 0;
  std::uint32_t line_no = 1;
  while (line_start <= content.size()) {
    std::size_t line_end = content.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = content.size();
    const std::string_view line = content.substr(line_start, line_end - line_start);

    std::optional<std::pair<std::size_t, std::size_t>> hit;
    std::string reason;
    std::size_t run = 0;
    for (std::size_t i = 0; i < line.size() && !hit; ++i) {
      if (line[i] == ' ' || line[i] == '\t') {
        ++run;
      } else {
        if (run >= t.whitespace_run_min && line[i] != '\r') {
          hit = std::make_pair(i - run, i);
          reason = std::to_string(run) + " consecutive whitespace characters before code";
        }
        run = 0;
      }
    }
    if (!hit && line.size() > t.max_code_column) {
      const std::string_view head = line.substr(0, t.max_code_column);
      const auto blanks = static_cast<std::size_t>(std::count_if(head.begin(), head.end(),
                                                                 [](char c) { return c == ' ' || c == '\t'; }));
      const std::size_t code = line.find_first_not_of(" \t\r", t.max_code_column);
      if (code != std::string_view::npos && blanks * 2 >= head.size())
        hit = std::make_pair(code, line.size());
      if (hit) reason = "code at column " + std::to_string(code + 1) + " of a mostly blank line";
    }
    if (hit) {
      SourceSpan span{std::string(path), line_no, line_no, line_start, line_end};
      // Evidence keeps the first code on the line and the code hidden after the gap.
      std::string evidence = text::trim(line.substr(0, hit->first));
      if (!evidence.empty()) evidence += " ";
      evidence += "[" + std::to_string(hit->second - hit->first) + " blank] ";
      evidence += text::trim(line.substr(hit->second));
      return {make_finding(TechniqueId::EvStVis, span, evidence, reason)};
    }
    if (line_end == content.size()) break;
    line_start = line_end + 1;
    ++line_no;
  }
  return {};
}

namespace {

bool is_bidi(char32_t cp) { return (cp >= 0x202A && cp <= 0x202E) || (cp >= 0x2066 && cp <= 0x2069); }

bool is_zero_width(char32_t cp) { return (cp >= 0x200B && cp <= 0x200D) || cp == 0xFEFF; }

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F300 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || cp == 0xFE0F ||
         (cp >= 0x1F000 && cp <= 0x1F2FF);
}

/// Latin letter a non-Latin codepoint is commonly mistaken for, or 0.
char confusable_latin(char32_t cp) {
  static const std::map<char32_t, char> table = {
      {0x0430, 'a'}, {0x0435, 'e'}, {0x043E, 'o'}, {0x0440, 'p'}, {0x0441, 'c'}, {0x0443, 'y'},
      {0x0445, 'x'}, {0x0456, 'i'}, {0x0458, 'j'}, {0x0455, 's'}, {0x0501, 'd'}, {0x04BB, 'h'},
      {0x0410, 'A'}, {0x0412, 'B'}, {0x0415, 'E'}, {0x041A, 'K'}, {0x041C, 'M'}, {0x041D, 'H'},
      {0x041E, 'O'}, {0x0420, 'P'}, {0x0421, 'C'}, {0x0422, 'T'}, {0x0425, 'X'}, {0x0406, 'I'},
      {0x0408, 'J'}, {0x0405, 'S'}, {0x03BF, 'o'}, {0x03B1, 'a'}, {0x03BD, 'v'}, {0x03C1, 'p'},
      {0x0391, 'A'}, {0x0392, 'B'}, {0x0395, 'E'}, {0x0396, 'Z'}, {0x0397, 'H'}, {0x0399, 'I'},
      {0x039A, 'K'}, {0x039C, 'M'}, {0x039D, 'N'}, {0x039F, 'O'}, {0x03A1, 'P'}, {0x03A4, 'T'},
      {0x03A5, 'Y'}, {0x03A7, 'X'}, {0x0131, 'i'}, {0x0261, 'g'}, {0x0251, 'a'}, {0x01C0, 'l'},
  };
  const auto it = table.find(cp);
  return it == table.end() ? 0 : it->second;
}

std::string codepoint_name(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

}  // namespace

std::vector<Finding> detect_unicode_tricks(std::string_view path, std::string_view content,
                                           const lex::TokenStream* stream) {
  std::vector<Finding> out;
  const text::LineIndex lines(content);
  auto line_span = [&](std::uint64_t offset) {
    const std::uint32_t l = lines.line_of(offset);
    return SourceSpan{std::string(path), l, l, lines.line_start(l), lines.line_end(l)};
  };

  char32_t prev = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t at = pos;
    if (static_cast<unsigned char>(content[pos]) < 0x80) {
      prev = static_cast<unsigned char>(content[pos++]);
      continue;
    }
    const char32_t cp = text::decode_utf8(content, pos);
    bool flag = is_bidi(cp) || (is_zero_width(cp) && !(cp == 0xFEFF && at == 0));
    if (flag && cp == 0x200D) {
      std::size_t look = pos;
      const char32_t next = look < content.size() ? text::decode_utf8(content, look) : 0;
      if (is_emoji(prev) || is_emoji(next)) flag = false;
    }
    prev = cp;
    if (!flag) continue;
    const SourceSpan span = line_span(at);
    Finding fd = make_finding(TechniqueId::EvStUni, span, slice(content, lex::Span{span.byte_start, span.byte_end, 1, 1}),
                              std::string(is_bidi(cp) ? "bidirectional control " : "zero-width character ") +
                                  codepoint_name(cp));
    fd.severity = Severity::Critical;
    fd.confidence = Confidence::Strong;
    fd.properties.emplace_back("codepoint", codepoint_name(cp));
    out.push_back(std::move(fd));
    break;
  }

  if (stream) {
    std::set<std::string> seen;
    for (const auto& tok : stream->tokens) {
      if (tok.kind != TokenKind::Identifier || !seen.insert(tok.text).second) continue;
      bool latin = false;
      char32_t confusable = 0;
      for (std::size_t p = 0; p < tok.text.size();) {
        const unsigned char b = static_cast<unsigned char>(tok.text[p]);
        if (b < 0x80) {
          latin = latin || std::isalpha(b);
          ++p;
          continue;
        }
        const char32_t cp = text::decode_utf8(tok.text, p);
        if (!confusable && confusable_latin(cp)) confusable = cp;
      }
      if (!latin || !confusable) continue;
      Finding fd = make_finding(TechniqueId::EvStUni, lex::to_source_span(path, tok.span), tok.text,
                                "identifier mixes Latin letters with " + codepoint_name(confusable) +
                                    " (looks like '" + std::string(1, confusable_latin(confusable)) + "')");
      fd.severity = Severity::Medium;
      fd.confidence = Confidence::Moderate;
      fd.properties.emplace_back("codepoint", codepoint_name(confusable));
      out.push_back(std::move(fd));
    }
  }
  return out;
}

namespace {

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::set<std::string> imported_modules(const lex::TokenStream& stream) {
  std::set<std::string> mods;
  for (const auto& tok : stream.tokens) {
    if (tok.kind != TokenKind::ImportStmt) continue;
    for (const auto& m : text::split(tok.detail, ',')) mods.insert(text::trim(m));
    for (const auto& p : tok.parts) mods.insert(p.substr(0, p.find('=')));
  }
  return mods;
}

}  // namespace

std::vector<Finding> detect_dynamic_modification(const AnalyzedFile& f, const BuiltinLists& b) {
  std::vector<Finding> out;
  const auto& toks = f.stream.tokens;
  const std::set<std::string> imported = imported_modules(f.stream);
  auto statement_span = [&](std::size_t lhs_first, std::size_t a) {
    std::size_t k = a + 1;
    const int depth = toks[a].nesting;
    while (k + 1 < toks.size() && toks[k + 1].span.line_start == toks[a].span.line_end &&
           !toks[k + 1].is_punct(";") && toks[k + 1].kind != TokenKind::Comment && toks[k + 1].nesting >= depth)
      ++k;
    if (k < toks.size() && toks[k].is_punct("{")) {
      const std::size_t close = lex::matching_close(toks, k);
      if (close < toks.size()) k = close;
    }
    return join(toks[lhs_first].span, toks[std::min(k, toks.size() - 1)].span);
  };
  auto lhs_start = [&](std::size_t a) {
    std::size_t k = a;
    while (k > 0 && (toks[k - 1].kind == TokenKind::Identifier || toks[k - 1].is_punct(".") ||
                     toks[k - 1].is_punct("::")))
      --k;
    return k;
  };

  for (std::size_t a = 0; a < toks.size(); ++a) {
    if (toks[a].kind != TokenKind::Assignment || toks[a].text != "=") continue;
    const std::string& target = toks[a].detail;
    const auto dot = target.find('.');
    if (dot == std::string::npos) continue;
    const std::string head = target.substr(0, dot);
    const std::string rest = target.substr(dot + 1);
    std::optional<Confidence> conf;
    switch (f.stream.language) {
      case Language::Python:
        if ((head == "builtins" || head == "__builtins__") && rest.find('.') == std::string::npos)
          conf = contains(b.python_builtins, rest) ? Confidence::Strong : Confidence::Moderate;
        else if (contains(b.python_patchable_modules, head) && imported.contains(head) &&
                 rest.find('.') == std::string::npos)
          conf = Confidence::Moderate;
        break;
      case Language::JavaScript: {
        if (contains(b.javascript_patchable_targets, target)) {
          conf = Confidence::Strong;
        } else if (rest.starts_with("prototype.") && contains(b.javascript_prototype_owners, head)) {
          conf = Confidence::Strong;
        } else if (contains(b.javascript_global_objects, head) && contains(b.javascript_patchable_targets, rest)) {
          conf = Confidence::Strong;
        }
        break;
      }
      default:
        break;
    }
    if (!conf) continue;
    Finding fd = finding_at(TechniqueId::EvDyMod, f, statement_span(lhs_start(a), a),
                            "assignment overwrites " + target);
    fd.confidence = *conf;
    fd.properties.emplace_back("target", target);
    out.push_back(std::move(fd));
  }

  if (f.stream.language == Language::Python) {
    // setattr(builtins, "print", fn)
    for (std::size_t i = 0; i + 4 < toks.size(); ++i) {
      if (!toks[i].is(TokenKind::Identifier, "setattr") || !toks[i + 1].is_punct("(")) continue;
      const Token& obj = toks[i + 2];
      if (obj.kind != TokenKind::Identifier || !(obj.text == "builtins" || obj.text == "__builtins__")) continue;
      const std::size_t close = lex::matching_close(toks, i + 1);
      if (close >= toks.size()) continue;
      Finding fd = finding_at(TechniqueId::EvDyMod, f, join(toks[i].span, toks[close].span),
                              "setattr overwrites a builtin");
      fd.confidence = Confidence::Strong;
      out.push_back(std::move(fd));
    }
  }

  if (f.stream.language == Language::Ruby) {
    // Reopened core class with method definitions at top level.
    std::size_t depth_modules = 0;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i].is(TokenKind::Other, "module")) ++depth_modules;
      if (!toks[i].is(TokenKind::Other, "class") || depth_modules > 0) continue;
      const Token& name = toks[i + 1];
      if (name.kind != TokenKind::Identifier || !contains(b.ruby_core_classes, name.text)) continue;
      if (i + 2 < toks.size() && toks[i + 2].is_punct("<")) continue;
      bool defines = false;
      std::size_t k = i + 2;
      for (; k < toks.size(); ++k) {
        if (toks[k].is(TokenKind::Other, "def")) defines = true;
        if (toks[k].is(TokenKind::Other, "class")) break;
      }
      if (!defines) continue;
      Finding fd = finding_at(TechniqueId::EvDyMod, f, join(toks[i].span, name.span),
                              "reopens core class " + name.text + " and redefines methods");
      fd.confidence = Confidence::Moderate;
      out.push_back(std::move(fd));
    }
  }
  return out;
}

std::vector<Finding> detect_second_stage(const AnalyzedFile& f, const Config& config) {
  const auto& toks = f.stream.tokens;
  const auto& s = config.sensitive();
  const Thresholds& t = config.thresholds();

  std::vector<std::uint32_t> url_lines;
  std::vector<std::uint32_t> exec_path_lines;
  for (const auto& tok : toks) {
    if (tok.kind != TokenKind::StringLiteral) continue;
    const std::string lower = text::to_lower(tok.text);
    for (const auto& p : s.url_prefixes)
      if (lower.starts_with(p)) url_lines.push_back(tok.span.line_start);
    for (const auto& suf : s.executable_suffixes)
      if (lower.ends_with(suf)) exec_path_lines.push_back(tok.span.line_start);
  }
  for (const auto& a : assembled_strings(f, t))
    for (const auto& p : s.url_prefixes)
      if (text::to_lower(a.value).starts_with(p)) url_lines.push_back(toks[a.first_token].span.line_start);
  if (url_lines.empty()) return {};

  for (const auto& net : f.calls) {
    if (net.api_class != ApiClass::Network) continue;
    const std::uint32_t nl = line_of(f, net);
    const bool url_near = std::any_of(url_lines.begin(), url_lines.end(),
                                      [&](std::uint32_t l) { return within(l, nl, t.proximity_lines); });
    if (!url_near) continue;
    const ApiCall* sink = nullptr;
    bool writes_executable = false;
    bool spawns = false;
    for (const auto& c : f.calls) {
      if (!within(line_of(f, c), nl, t.proximity_lines)) continue;
      if (c.api_class == ApiClass::FileWrite) {
        const bool exec_path = std::any_of(exec_path_lines.begin(), exec_path_lines.end(), [&](std::uint32_t l) {
          return within(l, line_of(f, c), t.proximity_lines);
        });
        if (exec_path) {
          writes_executable = true;
          if (!sink) sink = &c;
        }
      } else if (c.api_class == ApiClass::CodeEval) {
        if (!sink) sink = &c;
      } else if (c.api_class == ApiClass::ProcessSpawn) {
        spawns = true;
      }
    }
    if (!sink) continue;
    Finding fd = make_finding(TechniqueId::EvStStage2, f.call_span(net), f.call_text(net),
                              "downloads content with " + net.chain + " and passes it to " + sink->chain);
    fd.confidence = writes_executable && spawns ? Confidence::Strong : Confidence::Moderate;
    fd.properties.emplace_back("sink", sink->chain);
    return {fd};
  }
  return {};
}

namespace {

Language native_language(Ecosystem e) {
  switch (e) {
    case Ecosystem::Npm: return Language::JavaScript;
    case Ecosystem::PyPI: return Language::Python;
    case Ecosystem::Composer: return Language::PHP;
    case Ecosystem::RubyGems: return Language::Ruby;
    case Ecosystem::Cargo: return Language::Rust;
    case Ecosystem::Go: return Language::Go;
    case Ecosystem::Maven: return Language::Java;
  }
  return Language::JavaScript;
}

std::optional<std::string> media_kind(std::string_view bytes) {
  if (bytes.starts_with("\x89PNG\r\n\x1a\n")) return "png";
  if (bytes.starts_with("\xFF\xD8\xFF")) return "jpeg";
  if (bytes.size() >= 12 && bytes.starts_with("RIFF") && bytes.substr(8, 4) == "WAVE") return "wav";
  if (bytes.starts_with("GIF87a") || bytes.starts_with("GIF89a")) return "gif";
  if (bytes.starts_with("BM") && bytes.size() > 26) return "bmp";
  return std::nullopt;
}

std::uint32_t count_lines(std::string_view s) {
  return static_cast<std::uint32_t>(std::count(s.begin(), s.end(), '\n')) + (s.empty() || s.back() == '\n' ? 0 : 1);
}

}  // namespace

std::vector<Finding> census(PackageAnalysis& analysis, const Config& config) {
  std::vector<Finding> out;
  const auto& snap = analysis.snapshot();
  const Thresholds& t = config.thresholds();
  const auto files = analysis.all();

  // EV-ST-POLY
  const Language native = native_language(snap.coords.ecosystem);
  for (const auto* f : files) {
    if (f->stream.language != native) {
      if (const ApiCall* d = f->first_dangerous()) {
        Finding fd = make_finding(TechniqueId::EvStPoly, f->call_span(*d), f->call_text(*d),
                                  std::string(to_string(f->stream.language)) + " source in a " +
                                      std::string(to_string(snap.coords.ecosystem)) + " package calls " + d->chain);
        fd.properties.emplace_back("language", std::string(to_string(f->stream.language)));
        out.push_back(std::move(fd));
      }
    }
    const auto& toks = f->stream.tokens;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i].kind == TokenKind::Identifier && toks[i].text == "asm" && toks[i + 1].is_punct("!")) {
        out.push_back(finding_at(TechniqueId::EvStPoly, *f, join(toks[i].span, toks[i + 1].span),
                                 "inline assembly"));
        break;
      }
    }
  }
  for (const auto& [path, file] : snap.files) {
    if (file.symlink || file.content_skipped) continue;
    const std::string ext = text::extension(path);
    if (ext != ".c" && ext != ".h" && ext != ".cc" && ext != ".cpp" && ext != ".hpp") continue;
    const std::size_t at = file.content.find("__asm__");
    if (at == std::string::npos) continue;
    const text::LineIndex li(file.content);
    const std::uint32_t l = li.line_of(at);
    out.push_back(make_finding(TechniqueId::EvStPoly, SourceSpan{path, l, l, at, at + 7}, "__asm__",
                               "inline assembly"));
  }

  // EV-DY-STEG
  std::vector<std::string> media;
  for (const auto& [path, file] : snap.files)
    if (!file.symlink && !file.content_skipped && media_kind(file.content)) media.push_back(path);
  if (!media.empty()) {
    for (const auto* f : files) {
      const auto& toks = f->stream.tokens;
      for (const auto& rd : f->calls) {
        if (rd.api_class != ApiClass::FileRead || !rd.is_call) continue;
        std::optional<std::string> target;
        for (std::size_t k = rd.args_open; k <= rd.args_close && k < toks.size() && !target; ++k) {
          if (toks[k].kind != TokenKind::StringLiteral || toks[k].text.empty()) continue;
          for (const auto& m : media)
            if (text::basename(m) == text::basename(toks[k].text)) target = m;
        }
        if (!target) continue;
        const ApiCall* sink = nullptr;
        for (const auto& c : f->calls)
          if ((c.api_class == ApiClass::Decode || c.api_class == ApiClass::CodeEval) &&
              within(line_of(*f, c), line_of(*f, rd), t.proximity_lines))
            sink = &c;
        if (!sink) continue;
        Finding fd = make_finding(TechniqueId::EvDySteg, f->call_span(rd), f->call_text(rd),
                                  "reads media file " + *target + " and feeds " + sink->chain);
        fd.properties.emplace_back("media", *target);
        out.push_back(std::move(fd));
      }
    }
  }

  // EV-WS
  for (const auto* f : files) {
    const lex::CatchShapes shapes = lex::catch_shapes(f->stream);
    for (const auto& sh : shapes.shapes) {
      if (!sh.catch_body_is_empty) continue;
      const ApiCall* wrapped = nullptr;
      for (const auto& c : f->calls)
        if (DangerousApiCatalog::is_dangerous(c.api_class) && c.token >= sh.try_first && c.token < sh.try_last) {
          wrapped = &c;
          break;
        }
      if (!wrapped) continue;
      const lex::Span span = join(sh.try_span, sh.catch_span);
      Finding fd = finding_at(TechniqueId::EvWs, *f, span, "empty catch silences errors from " + wrapped->chain);
      fd.properties.emplace_back("api", wrapped->chain);
      out.push_back(std::move(fd));
    }
  }

  // EV-ST-FILES
  std::vector<const AnalyzedFile*> fragments;
  for (const auto* f : files)
    if (f->has_dangerous_call() && count_lines(f->content) < t.fragment_max_lines) fragments.push_back(f);
  const bool fragmented = fragments.size() >= t.fragment_min_files;
  if (fragmented || !snap.nested_archives.empty()) {
    std::string msg;
    if (!snap.nested_archives.empty())
      msg = std::to_string(snap.nested_archives.size()) + " nested archive(s)";
    if (fragmented)
      msg += (msg.empty() ? "" : "; ") + std::to_string(fragments.size()) + " small files with dangerous calls";
    const std::string path = fragmented ? fragments.front()->path : snap.nested_archives.front();
    Finding fd = make_finding(TechniqueId::EvStFiles, SourceSpan{path, 1, 1, 0, 0}, path, msg);
    for (const auto& n : snap.nested_archives) fd.properties.emplace_back("nested_archive", n);
    if (fragmented)
      for (const auto* f : fragments) fd.properties.emplace_back("fragment", f->path);
    out.push_back(std::move(fd));
  }
  return out;
}

namespace {

bool text_scannable(std::string_view path) {
  if (lex::profile_for_path(path)) return true;
  const std::string_view base = text::basename(path);
  return base == "package.json" || base == "composer.json" || base == "Cargo.toml" || base == "pom.xml" ||
         base == "setup.cfg" || base == "pyproject.toml" || base == "go.mod" || base.ends_with(".gemspec");
}

}  // namespace

std::vector<Finding> detect_evasion(PackageAnalysis& analysis, const Config& config) {
  std::vector<Finding> out;
  const Thresholds& t = config.thresholds();
  auto append = [&](std::vector<Finding> v) {
    for (auto& f : v) out.push_back(std::move(f));
  };
  for (const auto* f : analysis.all()) {
    append(classify_strings(*f, t));
    append(detect_pack_and_exec(*f, t));
    append(detect_concat_assembly(*f, config));
    append(detect_binary_array_payload(*f, config));
    append(detect_identifier_obfuscation(*f, t));
    append(detect_dynamic_modification(*f, config.builtins()));
    append(detect_second_stage(*f, config));
  }
  for (const auto& [path, file] : analysis.snapshot().files) {
    if (file.symlink || file.content_skipped || !text_scannable(path)) continue;
    if (file.content.find('\0') != std::string::npos) continue;
    append(detect_visual_deception(path, file.content, t));
    const AnalyzedFile* af = analysis.file(path);
    append(detect_unicode_tricks(path, file.content, af ? &af->stream : nullptr));
  }
  append(census(analysis, config));
  return out;
}

}  // namespace depsentry
