#include "cotforge/treebuild.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "cotforge/prng.hpp"
#include "cotforge/wire.hpp"

namespace cotforge::treebuild {

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

EmbeddingVector reference_embedding(std::string_view text, int dim) {
    EmbeddingVector v;
    v.values.assign(static_cast<size_t>(dim), 0.0);
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            v.values[fnv1a64(token) % static_cast<uint64_t>(dim)] += 1.0;
            token.clear();
        }
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b, double epsilon) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("cosine of " + std::to_string(a.dim()) + "-dim and " +
                                std::to_string(b.dim()) + "-dim vectors");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb) + epsilon);
}

struct Embedder::Cache {
    mutable std::shared_mutex mutex;
    mutable std::unordered_map<std::string, EmbeddingVector> entries;
};

Embedder::Embedder(EmbedderConfig config) : config_(std::move(config)) {
    if (config_.dim <= 0) {
        throw std::invalid_argument("embedder dim must be positive");
    }
    if (config_.mode == EmbedderConfig::Mode::remote && config_.endpoint.empty()) {
        throw std::invalid_argument("remote embedder requires an endpoint");
    }
    cache_ = std::make_unique<Cache>();
}

Embedder::~Embedder() = default;

EmbeddingVector Embedder::embed(std::string_view text) const {
    if (text.empty()) {
        throw EmptyText("cannot embed empty text");
    }
    if (config_.mode == EmbedderConfig::Mode::reference) {
        return reference_embedding(text, config_.dim);
    }

    const std::string key(text);
    {
        std::shared_lock lock(cache_->mutex);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end()) return it->second;
    }

    wire::Endpoint endpoint{config_.endpoint, config_.auth_token, config_.timeout_s,
                            config_.retries};
    auto response = wire::post_json(
        endpoint, {{"task", "embed"}, {"input", key}, {"params", {{"dim", config_.dim}}}});
    if (!response.contains("values") || !response["values"].is_array()) {
        throw wire::RemoteUnavailable("embed response missing 'values' array");
    }
    EmbeddingVector v;
    v.values = response["values"].get<std::vector<double>>();
    if (v.dim() != config_.dim) {
        throw DimensionMismatch("remote embedding has dim " + std::to_string(v.dim()) +
                                ", expected " + std::to_string(config_.dim));
    }

    std::unique_lock lock(cache_->mutex);
    cache_->entries.emplace(key, v);
    return v;
}

// ---------------------------------------------------------------------------
// Tree validation
// ---------------------------------------------------------------------------

void validate_tree(const QuestionTree& tree) {
    const int n = static_cast<int>(tree.nodes.size());
    auto fail = [](const std::string& why) { throw std::invalid_argument("invalid tree: " + why); };

    if (tree.merge_range.first < 2 || tree.merge_range.first > tree.merge_range.second) {
        fail("merge range must satisfy 2 <= min <= max");
    }
    for (int i = 0; i < n; ++i) {
        if (tree.nodes[static_cast<size_t>(i)].id != i) fail("node ids must be dense and ordered");
    }

    std::vector<int> parent_count(static_cast<size_t>(n), 0);
    for (const QuestionNode& node : tree.nodes) {
        if (node.children.empty()) {
            if (!node.answer.has_value()) fail("leaf node " + std::to_string(node.id) + " has no answer");
            if (node.level != 0) fail("leaf node " + std::to_string(node.id) + " has nonzero level");
        } else {
            if (node.children.size() < 2) fail("internal node " + std::to_string(node.id) + " has < 2 children");
            if (node.answer.has_value()) fail("internal node " + std::to_string(node.id) + " carries an answer");
            int max_child_level = 0;
            for (int child : node.children) {
                if (child < 0 || child >= n) fail("child id out of range");
                parent_count[static_cast<size_t>(child)] += 1;
                max_child_level = std::max(max_child_level, tree.node(child).level);
            }
            if (node.level != 1 + max_child_level) {
                fail("node " + std::to_string(node.id) + " level inconsistent with children");
            }
        }
    }

    std::vector<bool> is_root(static_cast<size_t>(n), false);
    for (int root : tree.roots) {
        if (root < 0 || root >= n) fail("root id out of range");
        is_root[static_cast<size_t>(root)] = true;
    }
    for (int i = 0; i < n; ++i) {
        const int parents = parent_count[static_cast<size_t>(i)];
        if (is_root[static_cast<size_t>(i)]) {
            if (parents != 0) fail("root " + std::to_string(i) + " has a parent");
        } else if (parents != 1) {
            fail("non-root " + std::to_string(i) + " has " + std::to_string(parents) + " parents");
        }
    }
    // Levels strictly decrease toward the leaves, so parent links cannot cycle.
}

// ---------------------------------------------------------------------------
// build_tree
// ---------------------------------------------------------------------------

QuestionTree build_tree(const std::vector<synthesis::AtomicQA>& leaves,
                        std::pair<int, int> merge_range, uint64_t seed,
                        const Embedder& embedder) {
    if (leaves.empty()) {
        throw EmptyLeafSet("build_tree requires at least one leaf");
    }
    if (merge_range.first < 2 || merge_range.first > merge_range.second) {
        throw InvalidRange("merge range must satisfy 2 <= min <= max");
    }

    QuestionTree tree;
    tree.merge_range = merge_range;
    tree.seed = seed;

    std::vector<EmbeddingVector> embeddings;
    for (const auto& leaf : leaves) {
        QuestionNode node;
        node.id = static_cast<int>(tree.nodes.size());
        node.text = leaf.question;
        node.answer = leaf.answer;
        node.level = 0;
        tree.nodes.push_back(std::move(node));
        embeddings.push_back(embedder.embed(leaf.question));
    }

    std::vector<int> active(tree.nodes.size());
    for (size_t i = 0; i < active.size(); ++i) active[i] = static_cast<int>(i);

    SplitMix64 rng(seed);
    while (active.size() >= 2) {
        const uint64_t k_lo =
            std::min<uint64_t>(static_cast<uint64_t>(merge_range.first), active.size());
        const uint64_t k_hi =
            std::min<uint64_t>(static_cast<uint64_t>(merge_range.second), active.size());
        const size_t k = static_cast<size_t>(rng.next_in(k_lo, k_hi));

        const int anchor = *std::min_element(active.begin(), active.end());

        // Rank the other active nodes by similarity to the anchor.
        std::vector<std::pair<double, int>> ranked;
        for (int id : active) {
            if (id == anchor) continue;
            ranked.emplace_back(
                cosine(embeddings[static_cast<size_t>(anchor)], embeddings[static_cast<size_t>(id)]),
                id);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        std::vector<int> members{anchor};
        for (size_t i = 0; i + 1 < k && i < ranked.size(); ++i) {
            members.push_back(ranked[i].second);
        }
        std::sort(members.begin(), members.end());

        QuestionNode merged;
        merged.id = static_cast<int>(tree.nodes.size());
        std::vector<std::string> texts;
        int max_level = 0;
        for (int id : members) {
            texts.push_back(tree.node(id).text);
            max_level = std::max(max_level, tree.node(id).level);
        }
        merged.text = synthesis::compose_question_texts(texts);
        merged.children = members;
        merged.level = 1 + max_level;

        embeddings.push_back(embedder.embed(merged.text));
        tree.nodes.push_back(std::move(merged));

        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](int id) {
                                        return std::find(members.begin(), members.end(), id) !=
                                               members.end();
                                    }),
                     active.end());
        active.push_back(static_cast<int>(tree.nodes.size()) - 1);
    }

    tree.roots = active;
    return tree;
}

QuestionTree merge_forest(const std::vector<QuestionTree>& trees) {
    QuestionTree forest;
    if (!trees.empty()) {
        forest.merge_range = trees.front().merge_range;
        forest.seed = trees.front().seed;
    }
    for (const QuestionTree& tree : trees) {
        const int offset = static_cast<int>(forest.nodes.size());
        for (QuestionNode node : tree.nodes) {
            node.id += offset;
            for (int& child : node.children) child += offset;
            forest.nodes.push_back(std::move(node));
        }
        for (int root : tree.roots) forest.roots.push_back(root + offset);
    }
    return forest;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

namespace {

Answer leaf_conjunction(const QuestionTree& tree, int id) {
    const QuestionNode& node = tree.node(id);
    if (node.children.empty()) return *node.answer;
    Answer result = Answer::yes;
    for (int child : node.children) {
        result = result && leaf_conjunction(tree, child);
    }
    return result;
}

// Pre-order over proper descendants: an internal child contributes its own
// step (text, conjunction of its leaves) before the steps of its subtree.
void collect_steps(const QuestionTree& tree, int id, std::vector<CoTStep>& steps) {
    for (int child : tree.node(id).children) {
        const QuestionNode& node = tree.node(child);
        if (node.children.empty()) {
            steps.push_back(CoTStep{node.text, *node.answer});
        } else {
            steps.push_back(CoTStep{node.text, leaf_conjunction(tree, child)});
            collect_steps(tree, child, steps);
        }
    }
}

void collect_records(const QuestionTree& tree, int id, std::vector<CoTRecord>& records) {
    const QuestionNode& node = tree.node(id);
    if (node.children.empty()) return;
    CoTRecord record;
    record.compound_question = node.text;
    collect_steps(tree, id, record.steps);
    record.final_answer = leaf_conjunction(tree, id);
    record.depth = node.level;
    records.push_back(std::move(record));
    for (int child : node.children) {
        collect_records(tree, child, records);
    }
}

} // namespace

std::vector<CoTRecord> decompose(const QuestionTree& tree) {
    validate_tree(tree);
    std::vector<CoTRecord> records;
    for (int root : tree.roots) {
        collect_records(tree, root, records);
    }
    return records;
}

} // namespace cotforge::treebuild
