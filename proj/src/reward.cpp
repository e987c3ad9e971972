#include "cotforge/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace cotforge::reward {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::vector<size_t> find_all(const std::string& hay, std::string_view needle) {
    std::vector<size_t> out;
    size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        out.push_back(pos);
        pos += needle.size();
    }
    return out;
}

std::optional<std::string> span_between(const std::string& raw, std::string_view open,
                                        std::string_view close) {
    const size_t open_pos = raw.find(open);
    if (open_pos == std::string::npos) return std::nullopt;
    const size_t body = open_pos + open.size();
    const size_t close_pos = raw.find(close, body);
    if (close_pos == std::string::npos) return std::nullopt;
    return raw.substr(body, close_pos - body);
}

} // namespace

ParsedResponse parse_tagged_output(const std::string& raw) {
    ParsedResponse parsed;
    parsed.raw = raw;
    parsed.think_text = span_between(raw, kThinkOpen, kThinkClose);
    parsed.answer_text = span_between(raw, kAnswerOpen, kAnswerClose);

    const auto think_open = find_all(raw, kThinkOpen);
    const auto think_close = find_all(raw, kThinkClose);
    const auto answer_open = find_all(raw, kAnswerOpen);
    const auto answer_close = find_all(raw, kAnswerClose);

    parsed.tags_in_order =
        think_open.size() == 1 && think_close.size() == 1 && answer_open.size() == 1 &&
        answer_close.size() == 1 && think_open[0] < think_close[0] &&
        think_close[0] + kThinkClose.size() <= answer_open[0] && answer_open[0] < answer_close[0];
    return parsed;
}

double format_reward(const ParsedResponse& parsed) {
    return parsed.tags_in_order ? 1.0 : 0.0;
}

double answer_reward(const ParsedResponse& parsed, Answer ground_truth) {
    if (!parsed.answer_text.has_value()) return 0.0;

    bool has_yes = false;
    bool has_no = false;
    std::string token;
    auto flush = [&] {
        if (token == "yes") has_yes = true;
        if (token == "no") has_no = true;
        token.clear();
    };
    for (char c : *parsed.answer_text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();

    if (has_yes && has_no) return 0.0; // contradictory output is never rewarded
    if (!has_yes && !has_no) return 0.0;
    const Answer stated = has_yes ? Answer::yes : Answer::no;
    return stated == ground_truth ? 1.0 : 0.0;
}

SentenceList split_sentences(const std::string& text) {
    SentenceList sentences;
    std::string current;
    auto flush = [&] {
        const size_t b = current.find_first_not_of(" \t\r");
        if (b != std::string::npos) {
            const size_t e = current.find_last_not_of(" \t\r");
            sentences.push_back(current.substr(b, e - b + 1));
        }
        current.clear();
    };
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?' || c == '\n') {
            flush();
        } else {
            current.push_back(c);
        }
    }
    flush();
    return sentences;
}

namespace {

// Pairwise cosine table between two sentence lists, embedding each distinct
// sentence once.
std::vector<std::vector<double>> similarity_table(const SentenceList& gen,
                                                  const SentenceList& ref,
                                                  const treebuild::Embedder& embedder,
                                                  double epsilon) {
    std::unordered_map<std::string, treebuild::EmbeddingVector> cache;
    auto embedding = [&](const std::string& s) -> const treebuild::EmbeddingVector& {
        auto it = cache.find(s);
        if (it == cache.end()) {
            it = cache.emplace(s, embedder.embed(s)).first;
        }
        return it->second;
    };
    std::vector<std::vector<double>> sim(gen.size(), std::vector<double>(ref.size(), 0.0));
    for (size_t i = 0; i < gen.size(); ++i) {
        for (size_t j = 0; j < ref.size(); ++j) {
            sim[i][j] = treebuild::cosine(embedding(gen[i]), embedding(ref[j]), epsilon);
        }
    }
    return sim;
}

} // namespace

SemanticScore semantic_score(const SentenceList& gen, const SentenceList& ref, double delta,
                             const treebuild::Embedder& embedder, double epsilon) {
    if (ref.empty()) {
        throw EmptyReference("semantic score requires a non-empty reference");
    }
    if (gen.empty()) return SemanticScore{0.0, 0.0};

    const auto sim = similarity_table(gen, ref, embedder, epsilon);
    long matches = 0;
    for (size_t i = 0; i < gen.size(); ++i) {
        for (size_t j = 0; j < ref.size(); ++j) {
            if (sim[i][j] >= delta) ++matches; // threshold itself counts
        }
    }
    const double raw =
        static_cast<double>(matches) / static_cast<double>(std::max(gen.size(), ref.size()));
    return SemanticScore{raw, std::min(raw, 1.0)};
}

EditScore soft_edit_distance(const SentenceList& gen, const SentenceList& ref, double theta,
                             const treebuild::Embedder& embedder, double epsilon) {
    if (ref.empty()) {
        throw EmptyReference("soft edit distance requires a non-empty reference");
    }
    const size_t m = gen.size();
    const size_t n = ref.size();
    const auto sim = similarity_table(gen, ref, embedder, epsilon);

    std::vector<std::vector<double>> d(m + 1, std::vector<double>(n + 1, 0.0));
    for (size_t j = 0; j <= n; ++j) d[0][j] = static_cast<double>(j);
    for (size_t i = 0; i <= m; ++i) d[i][0] = static_cast<double>(i);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            if (sim[i - 1][j - 1] >= theta) {
                d[i][j] = d[i - 1][j - 1];
            } else {
                d[i][j] = 1.0 + std::min({d[i - 1][j], d[i][j - 1], d[i - 1][j - 1]});
            }
        }
    }

    const double distance = d[m][n];
    return EditScore{distance, std::max(0.0, 1.0 - distance / static_cast<double>(n))};
}

ProcessScore process_reward(const std::string& gen_text, const std::string& ref_text,
                            const CCVRConfig& cfg, const treebuild::Embedder& embedder) {
    const SentenceList ref = split_sentences(ref_text);
    if (ref.empty()) {
        throw EmptyReference("process reward requires a reference with at least one sentence");
    }
    const SentenceList gen = split_sentences(gen_text);

    const SemanticScore sem = semantic_score(gen, ref, cfg.delta, embedder, cfg.epsilon);
    const EditScore edit = soft_edit_distance(gen, ref, cfg.theta, embedder, cfg.epsilon);

    ProcessScore out;
    out.semantic = sem.clamped;
    out.semantic_raw = sem.raw;
    out.edit = edit.score;
    out.edit_distance = edit.distance;
    out.process = cfg.lambda * sem.clamped + (1.0 - cfg.lambda) * edit.score;
    return out;
}

void CCVRConfig::validate() const {
    const double weight_sum = lambda_format + lambda_answer + lambda_process;
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "ccvr weights lambda_format + lambda_answer + lambda_process must sum to 1");
    }
    if (lambda_format < 0 || lambda_answer < 0 || lambda_process < 0) {
        throw std::invalid_argument("ccvr weights must be nonnegative");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(lambda)) throw std::invalid_argument("ccvr lambda must be in [0, 1]");
    if (!in_unit(delta)) throw std::invalid_argument("ccvr delta must be in [0, 1]");
    if (!in_unit(theta)) throw std::invalid_argument("ccvr theta must be in [0, 1]");
}

RewardBreakdown ccvr_reward(const std::string& raw_response, Answer ground_truth,
                            const std::string& ref_chain, const CCVRConfig& cfg,
                            const treebuild::Embedder& embedder) {
    if (split_sentences(ref_chain).empty()) {
        throw EmptyReference("ccvr reward requires a reference chain with at least one sentence");
    }

    const ParsedResponse parsed = parse_tagged_output(raw_response);

    RewardBreakdown breakdown;
    breakdown.format = format_reward(parsed);
    breakdown.answer = answer_reward(parsed, ground_truth);
    if (parsed.think_text.has_value()) {
        const ProcessScore p = process_reward(*parsed.think_text, ref_chain, cfg, embedder);
        breakdown.semantic = p.semantic;
        breakdown.semantic_raw = p.semantic_raw;
        breakdown.edit = p.edit;
        breakdown.edit_distance_raw = p.edit_distance;
        breakdown.process = p.process;
    }
    breakdown.total = cfg.lambda_format * breakdown.format + cfg.lambda_answer * breakdown.answer +
                      cfg.lambda_process * breakdown.process;
    return breakdown;
}

} // namespace cotforge::reward
