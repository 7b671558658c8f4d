#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "e2lvlm/error.hpp"

namespace e2lvlm {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Ground-truth label of an image-claim pair. Numeric encoding is part of
/// the on-disk contract and must never change: Falsified=1, Pristine=0.
enum class Label : int { Pristine = 0, Falsified = 1 };

inline int label_to_int(Label l) { return static_cast<int>(l); }

inline Label label_from_int(int v) {
  if (v == 0) return Label::Pristine;
  if (v == 1) return Label::Falsified;
  throw Error(ErrorCode::MalformedLine, "label code must be 0 or 1, got " + std::to_string(v));
}

inline std::string label_to_string(Label l) {
  return l == Label::Falsified ? "falsified" : "pristine";
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline Label label_from_string(std::string_view s) {
  const std::string low = ascii_lower(s);
  if (low == "falsified") return Label::Falsified;
  if (low == "pristine") return Label::Pristine;
  throw Error(ErrorCode::MalformedLine, "unknown label '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

/// Fixed-length real vector. `dim()` is the length; all entries must be
/// finite. Vectors are only comparable when dims match.
struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Embedding&) const = default;
};

// ---------------------------------------------------------------------------
// Samples and evidence
// ---------------------------------------------------------------------------

struct EvidenceText {
  std::string text;
  std::optional<std::string> source_url;
  std::optional<Embedding> embedding;

  bool operator==(const EvidenceText&) const = default;
};

struct EvidenceImage {
  std::string image_ref;
  std::optional<Embedding> embedding;

  bool operator==(const EvidenceImage&) const = default;
};

/// Retrieved evidence for one sample. `textual` is evidence about the image
/// (inverse image search); `visual` is evidence about the claim. Ordering is
/// the retrieval order and is preserved on round-trip.
struct EvidenceSet {
  std::vector<EvidenceText> textual;
  std::vector<EvidenceImage> visual;

  bool operator==(const EvidenceSet&) const = default;
};

/// One image-claim pair. `image_ref` is an opaque content reference (path,
/// URL, or data URI) passed through to the chat endpoint untouched.
/// Embeddings, when present, came with the manifest or from the embeddings
/// endpoint; they are never computed in-process.
struct Sample {
  std::string id;
  std::string image_ref;
  std::string claim;
  std::optional<Label> label;
  std::optional<Embedding> image_embedding;
  std::optional<Embedding> claim_embedding;

  bool operator==(const Sample&) const = default;
};

// ---------------------------------------------------------------------------
// Evidence selection and rewriting
// ---------------------------------------------------------------------------

enum class Strategy { LvlmRerank, CosineSim, Random };

inline std::string strategy_to_string(Strategy s) {
  switch (s) {
    case Strategy::LvlmRerank: return "lvlm";
    case Strategy::CosineSim: return "cosine";
    case Strategy::Random: return "random";
  }
  return "lvlm";
}

inline Strategy strategy_from_string(std::string_view s) {
  const std::string low = ascii_lower(s);
  if (low == "lvlm" || low == "lvlm_rerank" || low == "lvlmrerank") return Strategy::LvlmRerank;
  if (low == "cosine" || low == "cosine_sim" || low == "cosinesim") return Strategy::CosineSim;
  if (low == "random") return Strategy::Random;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(s) + "'");
}

/// Result of picking the top-1 evidence item. Either `chosen_index` points
/// into the evidence list, or the list was empty and `fallback_caption`
/// holds a model-produced caption instead — never both.
struct EvidenceSelection {
  Strategy strategy = Strategy::LvlmRerank;
  std::optional<std::size_t> chosen_index;
  std::optional<double> score;  // cosine value when strategy == CosineSim
  std::optional<std::string> fallback_caption;

  bool valid_against(std::size_t n_items) const {
    if (chosen_index.has_value())
      return !fallback_caption.has_value() && *chosen_index < n_items;
    return fallback_caption.has_value();
  }

  bool operator==(const EvidenceSelection&) const = default;
};

enum class RewriteOrigin { Rewrite, CaptionFallback };

inline std::string rewrite_origin_to_string(RewriteOrigin o) {
  return o == RewriteOrigin::Rewrite ? "rewrite" : "caption_fallback";
}

inline RewriteOrigin rewrite_origin_from_string(std::string_view s) {
  const std::string low = ascii_lower(s);
  if (low == "rewrite") return RewriteOrigin::Rewrite;
  if (low == "caption_fallback") return RewriteOrigin::CaptionFallback;
  throw Error(ErrorCode::MalformedLine, "unknown rewrite origin '" + std::string(s) + "'");
}

struct RewrittenEvidence {
  std::string text;
  RewriteOrigin origin = RewriteOrigin::Rewrite;

  bool operator==(const RewrittenEvidence&) const = default;
};

// ---------------------------------------------------------------------------
// Judgments
// ---------------------------------------------------------------------------

enum class Verdict { Yes, No };

inline std::string verdict_to_string(Verdict v) { return v == Verdict::Yes ? "Yes" : "No"; }

/// Verdict word the model must emit for a given gold label. The tuning
/// prompt asks whether image and claim are consistent, so No maps to
/// Falsified and Yes to Pristine. This mapping is fixed.
inline Verdict verdict_for_label(Label l) {
  return l == Label::Falsified ? Verdict::No : Verdict::Yes;
}

inline Label label_for_verdict(Verdict v) {
  return v == Verdict::No ? Label::Falsified : Label::Pristine;
}

/// Parsed model response: a Yes/No verdict plus free-text explanation.
/// An empty explanation is legal (zero-shot models sometimes emit a bare
/// verdict); it is a warning condition, not an error.
struct Judgment {
  Verdict verdict = Verdict::No;
  std::string explanation;

  Label predicted_label() const { return label_for_verdict(verdict); }

  bool operator==(const Judgment&) const = default;
};

// ---------------------------------------------------------------------------
// Chat messages and instruction records
// ---------------------------------------------------------------------------

enum class Role { System, User, Assistant };

inline std::string role_to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

inline Role role_from_string(std::string_view s) {
  const std::string low = ascii_lower(s);
  if (low == "system") return Role::System;
  if (low == "user") return Role::User;
  if (low == "assistant") return Role::Assistant;
  throw Error(ErrorCode::MalformedLine, "unknown role '" + std::string(s) + "'");
}

struct TextPart {
  std::string text;
  bool operator==(const TextPart&) const = default;
};

/// Image content reference: URL, file path, or data URI with inline base64.
struct ImagePart {
  std::string ref;
  bool operator==(const ImagePart&) const = default;
};

using Part = std::variant<TextPart, ImagePart>;

struct Message {
  Role role = Role::User;
  std::vector<Part> parts;

  bool operator==(const Message&) const = default;
};

/// Joins every text part of every message; used for matching and parsing.
inline std::string flatten_text(const std::vector<Message>& messages) {
  std::string out;
  for (const auto& m : messages)
    for (const auto& p : m.parts)
      if (const auto* t = std::get_if<TextPart>(&p)) {
        if (!out.empty()) out += '\n';
        out += t->text;
      }
  return out;
}

/// One entry of the generated instruction dataset: the full chat transcript
/// (user turn with image/claim/evidence, assistant turn with the target
/// judgment and explanation) plus the gold label it encodes.
struct InstructionRecord {
  std::string sample_id;
  std::vector<Message> messages;
  Label target_label = Label::Pristine;

  const Message* assistant_message() const {
    if (messages.empty()) return nullptr;
    const Message& last = messages.back();
    return last.role == Role::Assistant ? &last : nullptr;
  }

  std::string assistant_text() const {
    const Message* m = assistant_message();
    if (m == nullptr) return {};
    std::string out;
    for (const auto& p : m->parts)
      if (const auto* t = std::get_if<TextPart>(&p)) out += t->text;
    return out;
  }

  bool operator==(const InstructionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Small string helpers shared across modules
// ---------------------------------------------------------------------------

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace e2lvlm
