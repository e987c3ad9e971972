#pragma once
// Question hierarchy construction and decomposition.
//
// Leaves are atomic yes/no questions. build_tree merges them bottom-up by
// cosine similarity of sentence embeddings into a single-rooted hierarchy;
// decompose walks internal nodes top-down and emits one training record per
// internal node, coarse to fine.
//
// The merge procedure (normative):
//   active <- all leaf ids
//   while |active| >= 2:
//     k  <- uniform draw from [min(range.min,|active|), min(range.max,|active|)]
//           using SplitMix64 seeded once with `seed` (one draw per merge)
//     anchor <- lowest-id active node
//     partners <- the k-1 active nodes with highest cosine(anchor, .)
//                 (ties broken by lower id)
//     new internal node: children = {anchor} + partners in ascending id
//     order, text = compose_question_texts of the children's texts, level =
//     1 + max(child levels); the new node joins the active set
//   the last active node is the root
//
// Compound answers use conjunction semantics: a node's answer is "yes" iff
// every descendant leaf answers "yes".

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cotforge/synthesis.hpp"
#include "cotforge/types.hpp"

namespace cotforge::treebuild {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct EmptyText : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyLeafSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

struct EmbeddingVector {
    std::vector<double> values;
    int dim() const { return static_cast<int>(values.size()); }
};

struct EmbedderConfig {
    enum class Mode { reference, remote };
    Mode mode = Mode::reference;
    int dim = 256;
    std::string endpoint;
    std::string auth_token;
    int timeout_s = 30;
    int retries = 0;
};

// Reference embedding: lowercase, split on non-alphanumeric boundaries, and
// for each token increment values[fnv1a64(token) % dim] by 1. A plain term
// frequency vector, deterministic across platforms.
EmbeddingVector reference_embedding(std::string_view text, int dim);

// cosine(a, b) = (a.b) / (|a||b| + epsilon); 0 for a zero vector.
// Throws DimensionMismatch when dimensions differ.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b, double epsilon = 1e-9);

// Pure given the config; remote results are cached by exact sentence text
// (read-mostly cache, safe for concurrent use).
class Embedder {
public:
    explicit Embedder(EmbedderConfig config);
    ~Embedder();
    Embedder(const Embedder&) = delete;
    Embedder& operator=(const Embedder&) = delete;

    const EmbedderConfig& config() const { return config_; }

    // Throws EmptyText for an empty input, RemoteUnavailable /
    // DimensionMismatch in remote mode.
    EmbeddingVector embed(std::string_view text) const;

private:
    EmbedderConfig config_;
    struct Cache;
    std::unique_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Question tree
// ---------------------------------------------------------------------------

struct QuestionNode {
    int id = 0;
    std::string text;
    std::optional<Answer> answer; // leaves only
    std::vector<int> children;    // empty for leaves, >= 2 for internal nodes
    int level = 0;                // 0 for leaves, 1 + max(child levels) otherwise
};

struct QuestionTree {
    std::vector<QuestionNode> nodes; // nodes[i].id == i
    std::vector<int> roots;
    std::pair<int, int> merge_range{2, 4};
    uint64_t seed = 0;

    const QuestionNode& node(int id) const { return nodes.at(static_cast<size_t>(id)); }
};

// Full structural check: ids are dense, the node graph is a forest (every
// non-root has exactly one parent), leaf/internal invariants hold, and levels
// are consistent. Throws std::invalid_argument describing the first failure.
void validate_tree(const QuestionTree& tree);

QuestionTree build_tree(const std::vector<synthesis::AtomicQA>& leaves,
                        std::pair<int, int> merge_range, uint64_t seed,
                        const Embedder& embedder);

// Combines single trees into one forest document, reindexing node ids.
QuestionTree merge_forest(const std::vector<QuestionTree>& trees);

// ---------------------------------------------------------------------------
// Training records
// ---------------------------------------------------------------------------

struct CoTStep {
    std::string question;
    Answer answer = Answer::yes;

    bool operator==(const CoTStep&) const = default;
};

struct CoTRecord {
    std::string compound_question;
    std::vector<CoTStep> steps; // pre-order over proper descendants
    Answer final_answer = Answer::yes;
    int depth = 0; // level of the source node
};

// One record per internal node, pre-order from each root (coarse -> fine).
// A tree with no internal nodes yields no records.
std::vector<CoTRecord> decompose(const QuestionTree& tree);

} // namespace cotforge::treebuild
