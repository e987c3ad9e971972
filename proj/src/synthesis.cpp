#include "cotforge/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <semaphore>
#include <sstream>

#include "cotforge/prng.hpp"

namespace cotforge::synthesis {

namespace {

std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Leftmost whole-word occurrence of `token` in `text`, case-insensitive.
size_t find_word(std::string_view text, std::string_view token, size_t from = 0) {
    if (token.empty()) return std::string_view::npos;
    const std::string hay = lower_copy(text);
    const std::string needle = lower_copy(token);
    size_t pos = from;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
        const size_t end = pos + needle.size();
        const bool right_ok = end >= hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string_view::npos;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::string strip_punct_edges(const std::string& token) {
    size_t b = 0;
    size_t e = token.size();
    while (b < e && !is_word_char(token[b])) ++b;
    while (e > b && !is_word_char(token[e - 1])) --e;
    return token.substr(b, e - b);
}

std::vector<std::string> split_caption_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::string current;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            if (!current.empty()) sentences.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) sentences.push_back(current);
    return sentences;
}

// Applies the casing of the original token's first letter to the replacement.
std::string match_leading_case(const std::string& original, std::string replacement) {
    if (original.empty() || replacement.empty()) return replacement;
    if (std::isupper(static_cast<unsigned char>(original.front()))) {
        replacement.front() = static_cast<char>(
            std::toupper(static_cast<unsigned char>(replacement.front())));
    } else {
        replacement.front() = static_cast<char>(
            std::tolower(static_cast<unsigned char>(replacement.front())));
    }
    return replacement;
}

} // namespace

// ---------------------------------------------------------------------------
// RelationKind
// ---------------------------------------------------------------------------

std::string_view to_string(RelationKind kind) {
    switch (kind) {
        case RelationKind::Action: return "action";
        case RelationKind::State: return "state";
        case RelationKind::Possession: return "possession";
        case RelationKind::SpatialLocation: return "spatial_location";
        case RelationKind::CausalityEffect: return "causality_effect";
        case RelationKind::Temporal: return "temporal";
        case RelationKind::Quantitative: return "quantitative";
        case RelationKind::Perception: return "perception";
    }
    return "action";
}

std::optional<RelationKind> relation_kind_from_string(std::string_view s) {
    for (RelationKind kind : kAllRelationKinds) {
        if (s == to_string(kind)) return kind;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SubstitutionLexicon
// ---------------------------------------------------------------------------

void SubstitutionLexicon::add(const std::string& token, std::vector<std::string> replacements) {
    for (const auto& r : replacements) {
        if (iequals(r, token)) {
            throw std::invalid_argument("lexicon token '" + token + "' maps to itself");
        }
    }
    entries_.emplace_back(token, std::move(replacements));
}

const std::vector<std::string>* SubstitutionLexicon::find(std::string_view token) const {
    for (const auto& [key, replacements] : entries_) {
        if (iequals(key, token)) return &replacements;
    }
    return nullptr;
}

SubstitutionLexicon SubstitutionLexicon::builtin() {
    SubstitutionLexicon lex;
    lex.add("cat", {"lizard", "crow"});
    lex.add("dog", {"snake", "owl"});
    lex.add("bird", {"fish", "frog"});
    lex.add("horse", {"camel", "goat"});
    lex.add("rabbit", {"mole", "bat"});
    lex.add("fox", {"wolf", "deer"});
    lex.add("turtle", {"crab", "seal"});
    lex.add("sheep", {"pig", "cow"});
    lex.add("chase", {"ignore", "avoid"});
    lex.add("watch", {"push", "lift"});
    lex.add("follow", {"block", "drop"});
    lex.add("carry", {"bury", "throw"});
    return lex;
}

MockLists MockLists::builtin() {
    return MockLists{
        {"cat", "dog", "bird", "horse", "rabbit", "fox", "turtle", "sheep"},
        {"chases", "watches", "follows", "carries"},
    };
}

// ---------------------------------------------------------------------------
// Provider
// ---------------------------------------------------------------------------

struct Provider::InFlightGate {
    explicit InFlightGate(int slots) : sem(slots) {}
    std::counting_semaphore<> sem;
};

Provider::Provider(ProviderConfig config, MockLists lists)
    : config_(std::move(config)), lists_(std::move(lists)) {
    if (config_.mode == ProviderConfig::Mode::remote) {
        if (config_.endpoint.empty()) {
            throw std::invalid_argument("remote provider requires an endpoint");
        }
        gate_ = std::make_unique<InFlightGate>(std::max(1, config_.max_in_flight));
    }
    if (lists_.nouns.empty() || lists_.verbs.empty()) {
        throw std::invalid_argument("mock word lists must be non-empty");
    }
}

Provider::~Provider() = default;

nlohmann::json Provider::remote_call(const std::string& task, nlohmann::json input,
                                     nlohmann::json params) const {
    wire::Endpoint endpoint{config_.endpoint, config_.auth_token, config_.timeout_s,
                            config_.retries};
    nlohmann::json body{{"task", task}, {"input", std::move(input)}, {"params", std::move(params)}};
    gate_->sem.acquire();
    try {
        auto response = wire::post_json(endpoint, body);
        gate_->sem.release();
        return response;
    } catch (...) {
        gate_->sem.release();
        throw;
    }
}

Caption Provider::generate_caption(const ImageRef& image) const {
    if (image.id.empty()) {
        throw std::invalid_argument("image id must be non-empty");
    }

    std::string text;
    if (config_.mode == ProviderConfig::Mode::mock) {
        const uint64_t h = fnv1a64(image.id) ^ config_.seed;
        const std::string& noun1 = lists_.nouns[h % lists_.nouns.size()];
        const std::string& verb = lists_.verbs[h % lists_.verbs.size()];
        const std::string& noun2 = lists_.nouns[(h + 1) % lists_.nouns.size()];
        text = "The image shows a " + noun1 + " " + verb + " a " + noun2 + ".";
    } else {
        auto response = remote_call("caption", image.id, {{"uri", image.uri}});
        if (!response.contains("text") || !response["text"].is_string()) {
            throw wire::RemoteUnavailable("caption response missing 'text' field");
        }
        text = response["text"].get<std::string>();
    }

    const int words = count_words(text);
    if (words >= kMaxCaptionWords) {
        throw CaptionTooLong("caption for image '" + image.id + "' has " +
                             std::to_string(words) + " words (limit " +
                             std::to_string(kMaxCaptionWords - 1) + ")");
    }
    return Caption{image.id, std::move(text), words};
}

std::vector<Triple> Provider::extract_triples(const Caption& caption) const {
    if (caption.text.empty()) {
        throw std::invalid_argument("caption text must be non-empty");
    }

    std::vector<Triple> triples;
    if (config_.mode == ProviderConfig::Mode::mock) {
        for (const std::string& sentence : split_caption_sentences(caption.text)) {
            std::vector<std::string> tokens;
            for (const std::string& raw : whitespace_tokens(sentence)) {
                std::string t = strip_punct_edges(raw);
                if (!t.empty()) tokens.push_back(std::move(t));
            }
            for (size_t i = 0; i + 4 < tokens.size(); ++i) {
                if (iequals(tokens[i], "a") && iequals(tokens[i + 3], "a") &&
                    !iequals(tokens[i + 1], "a") && !iequals(tokens[i + 2], "a") &&
                    !iequals(tokens[i + 4], "a")) {
                    triples.push_back(
                        Triple{tokens[i + 1], RelationKind::Action, tokens[i + 2], tokens[i + 4]});
                    break; // one triple per sentence, leftmost match
                }
            }
        }
    } else {
        auto response =
            remote_call("triples", caption.text, {{"image_id", caption.image_id}});
        if (!response.contains("triples") || !response["triples"].is_array()) {
            throw wire::RemoteUnavailable("triples response missing 'triples' array");
        }
        for (const auto& item : response["triples"]) {
            auto kind = relation_kind_from_string(item.value("kind", ""));
            Triple t{item.value("subject", ""), kind.value_or(RelationKind::Action),
                     item.value("surface", ""), item.value("object", "")};
            if (t.subject.empty() || t.object.empty() || !kind.has_value()) {
                throw wire::RemoteUnavailable("triples response contains an invalid triple");
            }
            triples.push_back(std::move(t));
        }
    }

    if (triples.empty()) {
        throw NoTriplesFound("no triples extracted from caption of image '" +
                             caption.image_id + "'");
    }
    return triples;
}

std::string Provider::compose_compound(const std::vector<AtomicQA>& questions) const {
    if (questions.size() < 2) {
        throw TooFewQuestions("compound composition requires at least 2 questions");
    }
    std::vector<std::string> texts;
    texts.reserve(questions.size());
    for (const auto& qa : questions) texts.push_back(qa.question);

    if (config_.mode == ProviderConfig::Mode::mock) {
        return compose_question_texts(texts);
    }

    auto response = remote_call("compose", texts, nlohmann::json::object());
    if (!response.contains("text") || !response["text"].is_string()) {
        throw wire::RemoteUnavailable("compose response missing 'text' field");
    }
    std::string text = response["text"].get<std::string>();
    while (!text.empty() && (text.back() == '?' || std::isspace(static_cast<unsigned char>(text.back())))) {
        text.pop_back();
    }
    return text + "?";
}

// ---------------------------------------------------------------------------
// Pure operations
// ---------------------------------------------------------------------------

int count_words(std::string_view text) {
    return static_cast<int>(whitespace_tokens(text).size());
}

std::string strip_third_person(std::string_view verb) {
    const std::string v(verb);
    if (iequals(v, "has")) return match_leading_case(v, "have");
    if (iequals(v, "is")) return match_leading_case(v, "be");
    if (iequals(v, "does")) return match_leading_case(v, "do");

    auto ends_with = [&](std::string_view suffix) {
        return v.size() >= suffix.size() &&
               iequals(std::string_view(v).substr(v.size() - suffix.size()), suffix);
    };
    if (v.size() > 4 && ends_with("ies")) {
        return v.substr(0, v.size() - 3) + "y";
    }
    for (std::string_view es : {"ches", "shes", "sses", "xes", "zes", "oes"}) {
        if (v.size() > es.size() && ends_with(es)) {
            return v.substr(0, v.size() - 2);
        }
    }
    if (v.size() > 1 && ends_with("s") && !ends_with("ss")) {
        return v.substr(0, v.size() - 1);
    }
    return v;
}

namespace {

std::string first_word(const std::string& s) {
    auto tokens = whitespace_tokens(s);
    return tokens.empty() ? std::string() : tokens.front();
}

std::string rest_words(const std::string& s) {
    auto tokens = whitespace_tokens(s);
    std::string out;
    for (size_t i = 1; i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

bool uses_stripped_verb(RelationKind kind) {
    return kind != RelationKind::State && kind != RelationKind::SpatialLocation;
}

} // namespace

std::string question_relation_token(const Triple& triple) {
    if (!uses_stripped_verb(triple.kind)) return triple.surface;
    std::string stripped = strip_third_person(first_word(triple.surface));
    std::string tail = rest_words(triple.surface);
    return tail.empty() ? stripped : stripped + " " + tail;
}

AtomicQA generate_atomic_qa(const Triple& triple) {
    if (triple.subject.empty() || triple.object.empty()) {
        throw std::invalid_argument("triple subject and object must be non-empty");
    }
    const std::string relation = question_relation_token(triple);
    std::string question;
    switch (triple.kind) {
        case RelationKind::Action:
        case RelationKind::Possession:
            question = "Does the " + triple.subject + " " + relation + " a " + triple.object + "?";
            break;
        case RelationKind::State:
            question = "Is the " + triple.subject + " " + relation + " " + triple.object + "?";
            break;
        case RelationKind::SpatialLocation:
            question = "Is the " + triple.subject + " " + relation + " the " + triple.object + "?";
            break;
        case RelationKind::Quantitative:
            question = "Does the " + triple.subject + " " + relation + " " + triple.object + "?";
            break;
        case RelationKind::CausalityEffect:
        case RelationKind::Temporal:
        case RelationKind::Perception:
            question = "Does the " + triple.subject + " " + relation + " the " + triple.object + "?";
            break;
    }
    return AtomicQA{std::move(question), Answer::yes, triple, Polarity::original, std::nullopt};
}

namespace {

// Replacement is valid only if it never appears in a fact about the same
// subject; otherwise the altered question could still be true of the image.
bool flip_guaranteed(const std::string& replacement, const Triple& source,
                     const std::vector<Triple>& image_facts) {
    for (const Triple& fact : image_facts) {
        if (!iequals(fact.subject, source.subject)) continue;
        if (iequals(fact.subject, replacement) || iequals(fact.object, replacement)) {
            return false;
        }
    }
    return true;
}

struct Candidate {
    size_t position; // byte offset of the occurrence in the question
    std::string token; // as it appears in the question
};

std::vector<Candidate> substitution_candidates(const AtomicQA& qa) {
    std::vector<Candidate> out;
    auto push_if_found = [&](const std::string& token) {
        size_t pos = find_word(qa.question, token);
        if (pos != std::string_view::npos) {
            out.push_back(Candidate{pos, qa.question.substr(pos, token.size())});
        }
    };
    push_if_found(qa.source_triple.object);
    push_if_found(question_relation_token(qa.source_triple));
    return out;
}

} // namespace

std::vector<AtomicQA> make_lexical_negatives(const AtomicQA& qa,
                                             const SubstitutionLexicon& lexicon,
                                             const std::vector<Triple>& image_facts,
                                             int max_count) {
    if (qa.polarity != Polarity::original) {
        throw std::invalid_argument("negatives are derived from original-polarity questions");
    }

    std::vector<AtomicQA> negatives;
    bool any_in_lexicon = false;
    for (const Candidate& candidate : substitution_candidates(qa)) {
        const std::vector<std::string>* replacements = lexicon.find(candidate.token);
        if (replacements == nullptr) continue;
        any_in_lexicon = true;
        for (const std::string& raw : *replacements) {
            if (!flip_guaranteed(raw, qa.source_triple, image_facts)) continue;
            const std::string replacement = match_leading_case(candidate.token, raw);
            AtomicQA neg = qa;
            neg.question = qa.question.substr(0, candidate.position) + replacement +
                           qa.question.substr(candidate.position + candidate.token.size());
            neg.answer = Answer::no;
            neg.polarity = Polarity::negative;
            neg.substituted_token = std::make_pair(candidate.token, replacement);
            negatives.push_back(std::move(neg));
            if (static_cast<int>(negatives.size()) >= max_count) return negatives;
        }
    }

    if (!negatives.empty()) return negatives;
    if (!any_in_lexicon) {
        throw NoSubstitution("no question token of '" + qa.question + "' is in the lexicon");
    }
    throw FlipNotGuaranteed("every candidate replacement for '" + qa.question +
                            "' is contradicted by the image facts");
}

AtomicQA make_lexical_negative(const AtomicQA& qa, const SubstitutionLexicon& lexicon,
                               const std::vector<Triple>& image_facts) {
    return make_lexical_negatives(qa, lexicon, image_facts, 1).front();
}

std::string compose_question_texts(const std::vector<std::string>& questions) {
    if (questions.size() < 2) {
        throw TooFewQuestions("compound composition requires at least 2 questions");
    }
    std::string out;
    for (size_t i = 0; i < questions.size(); ++i) {
        std::string body = questions[i];
        while (!body.empty() &&
               (body.back() == '?' || std::isspace(static_cast<unsigned char>(body.back())))) {
            body.pop_back();
        }
        if (i > 0 && !body.empty()) {
            body.front() =
                static_cast<char>(std::tolower(static_cast<unsigned char>(body.front())));
        }
        if (i > 0) out += "; also, ";
        out += body;
    }
    return out + "?";
}

} // namespace cotforge::synthesis
