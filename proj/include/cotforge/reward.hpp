#pragma once
// Cognitively Coherent Verifiable Reward (CCVR).
//
// A response is scored on three axes and combined with fixed weights:
//
//   total = lambda_format * format + lambda_answer * answer
//         + lambda_process * process
//
//   format  - 1.0 iff <think> and <answer> tags are each present exactly
//             once, well formed, and the think block closes before the
//             answer block opens; 0.0 otherwise.
//   answer  - 1.0 iff the <answer> span contains the single correct polarity
//             token; a span containing both "yes" and "no" scores 0.0
//             (contradictions are never rewarded).
//   process - lambda * semantic + (1 - lambda) * edit, computed on the
//             sentences of the <think> span against a reference chain.
//
// Sentence segmentation (part of the external contract): split on '.', '!',
// '?', and newline; trim whitespace; drop empties; preserve order.
//
// semantic: the fraction of (generated, reference) sentence pairs whose
// embedding cosine is >= delta, normalized by max(m, n). The raw value can
// exceed 1 when many cross pairs match; the score is clamped to 1 and the
// raw value kept for diagnostics.
//
// edit: a soft edit distance over sentences. D is filled with borders
// D[0][j] = j, D[i][0] = i; an interior cell carries the diagonal when
// cosine >= theta and otherwise costs 1 + min(up, left, diagonal). The
// score is max(0, 1 - D[m][n] / n); note the normalization is by the
// reference length only, so the measure is deliberately asymmetric.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotforge/treebuild.hpp"
#include "cotforge/types.hpp"

namespace cotforge::reward {

struct EmptyReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct ParsedResponse {
    std::optional<std::string> think_text;  // first well-formed <think> span
    std::optional<std::string> answer_text; // first well-formed <answer> span
    bool tags_in_order = false;
    std::string raw;
};

// Total over strings; malformedness is data, not an error.
ParsedResponse parse_tagged_output(const std::string& raw);

double format_reward(const ParsedResponse& parsed);
double answer_reward(const ParsedResponse& parsed, Answer ground_truth);

using SentenceList = std::vector<std::string>;

SentenceList split_sentences(const std::string& text);

// ---------------------------------------------------------------------------
// Process scoring
// ---------------------------------------------------------------------------

struct CCVRConfig {
    double lambda_format = 0.2;
    double lambda_answer = 0.4;
    double lambda_process = 0.4;
    double lambda = 0.5; // semantic vs edit balance inside the process score
    double delta = 0.7;  // semantic pair-match threshold
    double theta = 0.7;  // soft edit match threshold
    double epsilon = 1e-9;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct SemanticScore {
    double raw = 0.0;     // unclamped pair count / max(m, n)
    double clamped = 0.0; // min(raw, 1)
};

// Throws EmptyReference when ref is empty; an empty gen scores 0.
SemanticScore semantic_score(const SentenceList& gen, const SentenceList& ref, double delta,
                             const treebuild::Embedder& embedder, double epsilon = 1e-9);

struct EditScore {
    double distance = 0.0; // D[m][n]
    double score = 0.0;    // max(0, 1 - distance / n)
};

EditScore soft_edit_distance(const SentenceList& gen, const SentenceList& ref, double theta,
                             const treebuild::Embedder& embedder, double epsilon = 1e-9);

struct ProcessScore {
    double semantic = 0.0;
    double semantic_raw = 0.0;
    double edit = 0.0;
    double edit_distance = 0.0;
    double process = 0.0;
};

ProcessScore process_reward(const std::string& gen_text, const std::string& ref_text,
                            const CCVRConfig& cfg, const treebuild::Embedder& embedder);

// ---------------------------------------------------------------------------
// Combined reward
// ---------------------------------------------------------------------------

struct RewardBreakdown {
    double format = 0.0;
    double answer = 0.0;
    double semantic = 0.0;
    double semantic_raw = 0.0;
    double edit = 0.0;
    double process = 0.0;
    double total = 0.0;
    double edit_distance_raw = 0.0;
};

// Process components are computed from the <think> span only; when no span
// is recoverable they are all zero. Throws EmptyReference only when
// ref_chain has no sentences.
RewardBreakdown ccvr_reward(const std::string& raw_response, Answer ground_truth,
                            const std::string& ref_chain, const CCVRConfig& cfg,
                            const treebuild::Embedder& embedder);

} // namespace cotforge::reward
