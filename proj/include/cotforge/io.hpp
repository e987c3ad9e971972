#pragma once
// Dataset file round-trips and run manifests.
//
// File formats (all JSON objects one-per-line unless noted):
//   image list    id<TAB>uri per line, uri optional
//   triples.jsonl {image_id, subject, relation_kind, relation_surface, object}
//   qa.jsonl      {image_id, question, answer, polarity, substituted_from,
//                  substituted_to, source_triple}
//   tree.json     {seed, merge_range, roots, nodes:[{id,text,answer?,children,level}]}
//   cot.jsonl     {compound_question, steps:[{q,a}], final_answer, depth}
//   responses     {id, raw_response}
//   refs          {id, ground_truth, ref_chain}
//   rewards       {id, format, answer, semantic, semantic_raw, edit, process,
//                  total, edit_distance_raw}
//   pred          {id, prediction}
//   gold          {id, gold, split, difficulty}
//
// All writers are atomic: content goes to a sibling temp file which is then
// renamed over the destination.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotforge/bench.hpp"
#include "cotforge/reward.hpp"
#include "cotforge/synthesis.hpp"
#include "cotforge/treebuild.hpp"

namespace cotforge::io {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Low-level file helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void atomic_write(const std::filesystem::path& path, const std::string& content);

// FNV-1a over the file bytes, as a fixed-width hex string.
std::string file_digest(const std::filesystem::path& path);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

// ---------------------------------------------------------------------------
// Codecs
// ---------------------------------------------------------------------------

std::vector<synthesis::ImageRef> read_image_list(const std::filesystem::path& path);

struct TripleRow {
    std::string image_id;
    synthesis::Triple triple;
};

nlohmann::json to_json(const TripleRow& row);
TripleRow triple_row_from_json(const nlohmann::json& j);

struct QARow {
    std::string image_id;
    synthesis::AtomicQA qa;
    int source_triple = 0; // line index into the triples file
};

nlohmann::json to_json(const QARow& row);
QARow qa_row_from_json(const nlohmann::json& j);

nlohmann::json to_json(const treebuild::QuestionTree& tree);
treebuild::QuestionTree tree_from_json(const nlohmann::json& j);

nlohmann::json to_json(const treebuild::CoTRecord& record);
treebuild::CoTRecord cot_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::string& id, const reward::RewardBreakdown& breakdown);

nlohmann::json to_json(const bench::EvalItem& item);
bench::EvalItem eval_item_from_json(const nlohmann::json& j);

nlohmann::json to_json(const bench::EvalReport& report);

} // namespace cotforge::io
