#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "e2lvlm/hash.hpp"
#include "e2lvlm/json_io.hpp"
#include "e2lvlm/rng.hpp"
#include "e2lvlm/types.hpp"

namespace e2lvlm {

enum class SplitKind { Train, Validation, Test, Custom };

struct SplitTag {
  SplitKind kind = SplitKind::Custom;
  std::string name;  // set when kind == Custom

  bool operator==(const SplitTag&) const = default;
};

struct CorpusEntry {
  Sample sample;
  EvidenceSet evidence;

  bool operator==(const CorpusEntry&) const = default;
};

/// An ordered, immutable-by-convention collection of samples with evidence.
struct Corpus {
  std::vector<CorpusEntry> entries;
  SplitTag split;

  std::size_t size() const { return entries.size(); }

  struct LabelCounts {
    std::size_t falsified = 0;
    std::size_t pristine = 0;
    std::size_t unlabeled = 0;
  };

  LabelCounts label_counts() const {
    LabelCounts c;
    for (const auto& e : entries) {
      if (!e.sample.label)
        ++c.unlabeled;
      else if (*e.sample.label == Label::Falsified)
        ++c.falsified;
      else
        ++c.pristine;
    }
    return c;
  }

  bool operator==(const Corpus&) const = default;
};

// ---------------------------------------------------------------------------
// Manifest I/O — UTF-8, one self-contained JSON record per line.
// ---------------------------------------------------------------------------

/// Parses a manifest file. All validation issues are collected with their
/// line numbers and thrown as one aggregate Error whose code is the first
/// issue's code.
inline Corpus load_manifest(const std::filesystem::path& path, SplitTag split = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());

  Corpus corpus;
  corpus.split = std::move(split);
  std::unordered_map<std::string, std::size_t> seen_ids;  // id -> first line
  std::vector<std::pair<ErrorCode, std::string>> issues;
  std::optional<std::size_t> expected_dim;

  auto check_dims = [&](const Sample& s, const EvidenceSet& ev, std::size_t line_no) {
    auto check = [&](const std::optional<Embedding>& e) {
      if (!e) return;
      if (!expected_dim) {
        expected_dim = e->dim();
        return;
      }
      if (e->dim() != *expected_dim)
        throw Error(ErrorCode::EmbeddingDimMismatch,
                    "line " + std::to_string(line_no) + ": expected dim " +
                        std::to_string(*expected_dim) + ", got " + std::to_string(e->dim()));
    };
    check(s.image_embedding);
    check(s.claim_embedding);
    for (const auto& t : ev.textual) check(t.embedding);
    for (const auto& v : ev.visual) check(v.embedding);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      auto [sample, evidence] = sample_record_from_json(j);
      auto [it, inserted] = seen_ids.emplace(sample.id, line_no);
      if (!inserted)
        throw Error(ErrorCode::DuplicateId,
                    "line " + std::to_string(line_no) + ": duplicate sample id '" + sample.id +
                        "' (first seen at line " + std::to_string(it->second) + ")");
      check_dims(sample, evidence, line_no);
      corpus.entries.push_back({std::move(sample), std::move(evidence)});
    } catch (const Error& e) {
      std::string msg = e.what();
      if (msg.find("line ") == std::string::npos)
        msg = std::string(error_code_name(e.code())) + ": line " + std::to_string(line_no) + ": " +
              msg.substr(std::string(error_code_name(e.code())).size() + 2);
      issues.emplace_back(e.code(), msg);
    } catch (const json::exception& e) {
      issues.emplace_back(ErrorCode::MalformedLine,
                          "MalformedLine: line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (!issues.empty()) {
    std::vector<std::string> notes;
    notes.reserve(issues.size());
    for (const auto& [code, msg] : issues) notes.push_back(msg);
    std::string summary = notes.front();
    if (notes.size() > 1)
      summary += " (+" + std::to_string(notes.size() - 1) + " more issue(s))";
    throw Error(issues.front().first, summary, std::move(notes));
  }
  return corpus;
}

inline void save_manifest(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest " + path.string());
  for (const auto& e : corpus.entries)
    out << sample_record_to_json(e.sample, e.evidence).dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

/// SHA-256 over the canonical serialization of every record, order included.
inline std::string corpus_fingerprint(const Corpus& corpus) {
  std::string buf;
  for (const auto& e : corpus.entries) {
    buf += sample_record_to_json(e.sample, e.evidence).dump();
    buf += '\n';
  }
  return sha256_hex(buf);
}

// ---------------------------------------------------------------------------
// Deterministic stratified subsampling (data-scaling runs)
// ---------------------------------------------------------------------------

/// Samples ceil(fraction * N) entries without replacement, deterministically
/// from `seed`. Stratified by label with largest-remainder apportionment, so
/// per-label counts stay within one sample of the exact proportion; pass
/// stratified=false for plain uniform sampling. Output preserves the source
/// order of the selected entries.
inline Corpus split_fraction(const Corpus& corpus, double fraction, std::uint64_t seed,
                             bool stratified = true) {
  if (corpus.entries.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot split an empty corpus");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw Error(ErrorCode::InvalidConfig,
                "fraction must be in (0,1], got " + std::to_string(fraction));

  const std::size_t total = corpus.entries.size();
  const auto want_total = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total)));

  // Group indices by stratum. Unlabeled samples form their own stratum.
  std::map<std::string, std::vector<std::size_t>> groups;
  if (stratified) {
    for (std::size_t i = 0; i < total; ++i) {
      const auto& label = corpus.entries[i].sample.label;
      groups[label ? label_to_string(*label) : "unlabeled"].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) groups["all"].push_back(i);
  }

  // Largest-remainder apportionment of want_total across strata.
  struct Quota {
    std::string name;
    std::size_t base;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [name, idxs] : groups) {
    const double exact = fraction * static_cast<double>(idxs.size());
    auto base = static_cast<std::size_t>(std::floor(exact));
    base = std::min(base, idxs.size());
    quotas.push_back({name, base, exact - std::floor(exact)});
    assigned += base;
  }
  std::sort(quotas.begin(), quotas.end(), [](const Quota& a, const Quota& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    return a.name < b.name;
  });
  std::size_t leftover = want_total > assigned ? want_total - assigned : 0;
  std::map<std::string, std::size_t> take;
  for (const auto& q : quotas) take[q.name] = q.base;
  for (auto& q : quotas) {
    if (leftover == 0) break;
    if (take[q.name] < groups[q.name].size()) {
      ++take[q.name];
      --leftover;
    }
  }

  std::vector<std::size_t> chosen;
  chosen.reserve(want_total);
  for (auto& [name, idxs] : groups) {
    Rng rng(derive_seed(seed, "split:" + name));
    rng.shuffle(idxs);
    const std::size_t n = std::min(take[name], idxs.size());
    chosen.insert(chosen.end(), idxs.begin(), idxs.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::sort(chosen.begin(), chosen.end());

  Corpus out;
  out.split = SplitTag{SplitKind::Custom, "fraction"};
  out.entries.reserve(chosen.size());
  for (std::size_t i : chosen) out.entries.push_back(corpus.entries[i]);
  return out;
}

}  // namespace e2lvlm
