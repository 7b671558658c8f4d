#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "e2lvlm/error.hpp"
#include "e2lvlm/types.hpp"

namespace e2lvlm {

// ordered_json keeps insertion order on dump, which keeps every emitted
// line byte-stable. Plain (sorted) json is used where canonical key order
// matters, e.g. cache keys.
using json = nlohmann::ordered_json;
using canonical_json = nlohmann::json;

namespace detail {

inline const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

inline json embedding_to_json(const Embedding& e) {
  json arr = json::array();
  for (double v : e.values) arr.push_back(v);
  return arr;
}

inline Embedding embedding_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedLine, "embedding must be an array");
  Embedding e;
  e.values.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::MalformedLine, "embedding entries must be numbers");
    e.values.push_back(v.get<double>());
  }
  if (!e.all_finite()) throw Error(ErrorCode::MalformedLine, "embedding entries must be finite");
  return e;
}

// ---------------------------------------------------------------------------
// Evidence
// ---------------------------------------------------------------------------

inline json evidence_text_to_json(const EvidenceText& e) {
  json j;
  j["text"] = e.text;
  if (e.source_url) j["source_url"] = *e.source_url;
  if (e.embedding) j["embedding"] = embedding_to_json(*e.embedding);
  return j;
}

inline EvidenceText evidence_text_from_json(const json& j) {
  EvidenceText e;
  const json* text = detail::find(j, "text");
  if (text == nullptr || !text->is_string())
    throw Error(ErrorCode::MissingField, "textual evidence item lacks 'text'");
  e.text = text->get<std::string>();
  if (trim(e.text).empty())
    throw Error(ErrorCode::MissingField, "textual evidence 'text' is empty");
  if (const json* u = detail::find(j, "source_url")) e.source_url = u->get<std::string>();
  if (const json* emb = detail::find(j, "embedding")) e.embedding = embedding_from_json(*emb);
  return e;
}

inline json evidence_image_to_json(const EvidenceImage& e) {
  json j;
  j["image"] = e.image_ref;
  if (e.embedding) j["embedding"] = embedding_to_json(*e.embedding);
  return j;
}

inline EvidenceImage evidence_image_from_json(const json& j) {
  EvidenceImage e;
  const json* img = detail::find(j, "image");
  if (img == nullptr || !img->is_string())
    throw Error(ErrorCode::MissingField, "visual evidence item lacks 'image'");
  e.image_ref = img->get<std::string>();
  if (e.image_ref.empty())
    throw Error(ErrorCode::MissingField, "visual evidence 'image' is empty");
  if (const json* emb = detail::find(j, "embedding")) e.embedding = embedding_from_json(*emb);
  return e;
}

// ---------------------------------------------------------------------------
// Manifest records (one sample + its evidence per line)
// ---------------------------------------------------------------------------

inline json sample_record_to_json(const Sample& s, const EvidenceSet& ev) {
  json j;
  j["id"] = s.id;
  j["image"] = s.image_ref;
  j["claim"] = s.claim;
  if (s.label) j["label"] = label_to_string(*s.label);
  if (s.image_embedding) j["image_embedding"] = embedding_to_json(*s.image_embedding);
  if (s.claim_embedding) j["claim_embedding"] = embedding_to_json(*s.claim_embedding);
  if (!ev.textual.empty()) {
    json arr = json::array();
    for (const auto& t : ev.textual) arr.push_back(evidence_text_to_json(t));
    j["textual_evidence"] = arr;
  }
  if (!ev.visual.empty()) {
    json arr = json::array();
    for (const auto& v : ev.visual) arr.push_back(evidence_image_to_json(v));
    j["visual_evidence"] = arr;
  }
  return j;
}

inline std::pair<Sample, EvidenceSet> sample_record_from_json(const json& j) {
  Sample s;
  EvidenceSet ev;
  const json* id = detail::find(j, "id");
  if (id == nullptr || !id->is_string() || id->get<std::string>().empty())
    throw Error(ErrorCode::MissingField, "record lacks non-empty 'id'");
  s.id = id->get<std::string>();
  const json* image = detail::find(j, "image");
  if (image == nullptr || !image->is_string())
    throw Error(ErrorCode::MissingField, "record lacks 'image'");
  s.image_ref = image->get<std::string>();
  const json* claim = detail::find(j, "claim");
  if (claim == nullptr || !claim->is_string() || trim(claim->get<std::string>()).empty())
    throw Error(ErrorCode::MissingField, "record lacks non-empty 'claim'");
  s.claim = claim->get<std::string>();
  if (const json* label = detail::find(j, "label")) s.label = label_from_string(label->get<std::string>());
  if (const json* emb = detail::find(j, "image_embedding")) s.image_embedding = embedding_from_json(*emb);
  if (const json* emb = detail::find(j, "claim_embedding")) s.claim_embedding = embedding_from_json(*emb);
  if (const json* arr = detail::find(j, "textual_evidence")) {
    if (!arr->is_array()) throw Error(ErrorCode::MalformedLine, "'textual_evidence' must be an array");
    for (const auto& item : *arr) ev.textual.push_back(evidence_text_from_json(item));
  }
  if (const json* arr = detail::find(j, "visual_evidence")) {
    if (!arr->is_array()) throw Error(ErrorCode::MalformedLine, "'visual_evidence' must be an array");
    for (const auto& item : *arr) ev.visual.push_back(evidence_image_from_json(item));
  }
  return {std::move(s), std::move(ev)};
}

// ---------------------------------------------------------------------------
// Chat messages, dataset format ({type: text|image, value})
// ---------------------------------------------------------------------------

inline json message_to_json(const Message& m) {
  json j;
  j["role"] = role_to_string(m.role);
  json content = json::array();
  for (const auto& p : m.parts) {
    json part;
    if (const auto* t = std::get_if<TextPart>(&p)) {
      part["type"] = "text";
      part["value"] = t->text;
    } else {
      part["type"] = "image";
      part["value"] = std::get<ImagePart>(p).ref;
    }
    content.push_back(part);
  }
  j["content"] = content;
  return j;
}

inline Message message_from_json(const json& j) {
  Message m;
  const json* role = detail::find(j, "role");
  if (role == nullptr) throw Error(ErrorCode::MissingField, "message lacks 'role'");
  m.role = role_from_string(role->get<std::string>());
  const json* content = detail::find(j, "content");
  if (content == nullptr || !content->is_array())
    throw Error(ErrorCode::MissingField, "message lacks 'content' array");
  for (const auto& part : *content) {
    const json* type = detail::find(part, "type");
    const json* value = detail::find(part, "value");
    if (type == nullptr || value == nullptr)
      throw Error(ErrorCode::MissingField, "content part lacks 'type'/'value'");
    const std::string t = type->get<std::string>();
    if (t == "text")
      m.parts.emplace_back(TextPart{value->get<std::string>()});
    else if (t == "image")
      m.parts.emplace_back(ImagePart{value->get<std::string>()});
    else
      throw Error(ErrorCode::MalformedLine, "unknown content part type '" + t + "'");
  }
  return m;
}

inline json instruction_record_to_json(const InstructionRecord& r) {
  json j;
  j["sample_id"] = r.sample_id;
  json msgs = json::array();
  for (const auto& m : r.messages) msgs.push_back(message_to_json(m));
  j["messages"] = msgs;
  j["label"] = label_to_string(r.target_label);
  return j;
}

inline InstructionRecord instruction_record_from_json(const json& j) {
  InstructionRecord r;
  const json* id = detail::find(j, "sample_id");
  if (id == nullptr) throw Error(ErrorCode::MissingField, "record lacks 'sample_id'");
  r.sample_id = id->get<std::string>();
  const json* msgs = detail::find(j, "messages");
  if (msgs == nullptr || !msgs->is_array())
    throw Error(ErrorCode::MissingField, "record lacks 'messages' array");
  for (const auto& m : *msgs) r.messages.push_back(message_from_json(m));
  const json* label = detail::find(j, "label");
  if (label == nullptr) throw Error(ErrorCode::MissingField, "record lacks 'label'");
  r.target_label = label_from_string(label->get<std::string>());
  return r;
}

// ---------------------------------------------------------------------------
// Evidence selection / rewritten evidence
// ---------------------------------------------------------------------------

inline json selection_to_json(const EvidenceSelection& s) {
  json j;
  j["strategy"] = strategy_to_string(s.strategy);
  if (s.chosen_index) j["chosen_index"] = *s.chosen_index;
  if (s.score) j["score"] = *s.score;
  if (s.fallback_caption) j["fallback_caption"] = *s.fallback_caption;
  return j;
}

inline EvidenceSelection selection_from_json(const json& j) {
  EvidenceSelection s;
  const json* strat = detail::find(j, "strategy");
  if (strat == nullptr) throw Error(ErrorCode::MissingField, "selection lacks 'strategy'");
  s.strategy = strategy_from_string(strat->get<std::string>());
  if (const json* idx = detail::find(j, "chosen_index")) s.chosen_index = idx->get<std::size_t>();
  if (const json* sc = detail::find(j, "score")) s.score = sc->get<double>();
  if (const json* fb = detail::find(j, "fallback_caption")) s.fallback_caption = fb->get<std::string>();
  return s;
}

inline json rewritten_to_json(const RewrittenEvidence& r) {
  json j;
  j["text"] = r.text;
  j["origin"] = rewrite_origin_to_string(r.origin);
  return j;
}

inline RewrittenEvidence rewritten_from_json(const json& j) {
  RewrittenEvidence r;
  const json* text = detail::find(j, "text");
  if (text == nullptr) throw Error(ErrorCode::MissingField, "rewritten evidence lacks 'text'");
  r.text = text->get<std::string>();
  if (const json* o = detail::find(j, "origin")) r.origin = rewrite_origin_from_string(o->get<std::string>());
  return r;
}

}  // namespace e2lvlm
