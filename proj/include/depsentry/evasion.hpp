#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/ace.hpp"
#include "depsentry/config.hpp"
#include "depsentry/model.hpp"

namespace depsentry {

enum class CharsetClass { Base64Like, HexLike, Printable, Mixed, BinaryIsh };
std::string_view to_string(CharsetClass c);

struct StringClassification {
  std::string literal;
  double entropy_bits_per_byte = 0.0;
  CharsetClass charset_class = CharsetClass::Printable;
  /// Decoded text when the literal is base64-like or hex-like.
  std::optional<std::string> decoded_preview;
  /// Decoded bytes are printable enough to count as an encoded string.
  bool encoded = false;
  /// Meets the opaque-string length and entropy floors without being encoded.
  bool opaque = false;
};

/// Shannon entropy over byte frequencies, in bits per byte.
double shannon_entropy(std::string_view bytes);

/// Strict RFC 4648 base64 decode (whitespace ignored); nullopt when malformed.
std::optional<std::string> decode_base64(std::string_view text);
/// Even-length hex decode; nullopt when malformed.
std::optional<std::string> decode_hex(std::string_view text);

StringClassification classify_literal(std::string_view literal, const Thresholds& t);

/// EV-DO-ENC and EV-DO-CRY over string literals.
std::vector<Finding> classify_strings(const AnalyzedFile& file, const Thresholds& t);
/// EV-DY-PACK (decode feeding eval) and EV-DO-CMP (decompression of embedded data).
std::vector<Finding> detect_pack_and_exec(const AnalyzedFile& file, const Thresholds& t);

/// A string assembled from short literal pieces.
struct AssembledString {
  std::string value;
  std::size_t pieces = 0;
  std::size_t first_token = 0;
  std::size_t last_token = 0;
};

std::vector<AssembledString> assembled_strings(const AnalyzedFile& file, const Thresholds& t);
/// URL prefix, credential path, or a shell command word.
bool is_sensitive_shape(std::string_view value, const SensitiveLists& s);

/// EV-DO-SPLIT.
std::vector<Finding> detect_concat_assembly(const AnalyzedFile& file, const Config& config);
/// EV-DO-BIN.
std::vector<Finding> detect_binary_array_payload(const AnalyzedFile& file, const Config& config);

/// Fraction of long distinct identifiers that look machine-renamed, and how many were scored.
struct IdentifierScore {
  double score = 0.0;
  std::size_t scored = 0;
  std::vector<std::size_t> flagged_tokens;
};
IdentifierScore identifier_score(const lex::TokenStream& stream, const Thresholds& t);
bool looks_renamed(std::string_view identifier, const Thresholds& t);

/// EV-ST-ID.
std::vector<Finding> detect_identifier_obfuscation(const AnalyzedFile& file, const Thresholds& t);
/// EV-ST-VIS over raw bytes.
std::vector<Finding> detect_visual_deception(std::string_view path, std::string_view content,
                                             const Thresholds& t);
/// EV-ST-UNI over raw bytes and identifier tokens (identifiers skipped when `stream` is null).
std::vector<Finding> detect_unicode_tricks(std::string_view path, std::string_view content,
                                           const lex::TokenStream* stream);
/// EV-DY-MOD.
std::vector<Finding> detect_dynamic_modification(const AnalyzedFile& file, const BuiltinLists& builtins);
/// EV-ST-STAGE2.
std::vector<Finding> detect_second_stage(const AnalyzedFile& file, const Config& config);

/// EV-ST-FILES, EV-ST-POLY, EV-DY-STEG and EV-WS over the whole snapshot.
std::vector<Finding> census(PackageAnalysis& analysis, const Config& config);

/// Every evasion detector over every file of the snapshot.
std::vector<Finding> detect_evasion(PackageAnalysis& analysis, const Config& config);

}  // namespace depsentry
