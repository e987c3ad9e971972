#pragma once
// Caption -> triple -> atomic QA -> compound question synthesis.
//
// All model-backed steps go through a Provider with two modes:
//   mock   - deterministic, offline, fully determined by (inputs, seed)
//   remote - one wire round trip per operation (see wire.hpp)
//
// Mock contracts (normative; tests and downstream stages depend on them):
//
//   Caption text is the template
//       "The image shows a {noun1} {verb} a {noun2}."
//   with h = fnv1a64(image.id) XOR seed, noun1 = nouns[h % |nouns|],
//   verb = verbs[h % |verbs|], noun2 = nouns[(h + 1) % |nouns|].
//
//   Triple extraction matches each sentence against the pattern
//       "a {X} {V} a {Y}"
//   (five consecutive whitespace tokens, articles compared case-insensitively,
//   punctuation stripped from token edges) and emits (X, Action:{V}, Y).
//   One triple per sentence, leftmost match. Non-matching sentences yield
//   nothing.
//
//   Compound composition strips each trailing '?', lowercases the leading
//   character of every body after the first, joins with "; also, " and
//   re-appends a single '?'.
//
// Atomic question templates, one per relation kind ({verb} is the first word
// of the relation surface with third-person -s stripped, see
// strip_third_person):
//
//   Action          "Does the {subject} {verb} a {object}?"
//   State           "Is the {subject} {surface} {object}?"
//   Possession      "Does the {subject} {verb} a {object}?"
//   SpatialLocation "Is the {subject} {surface} the {object}?"
//   CausalityEffect "Does the {subject} {verb} the {object}?"
//   Temporal        "Does the {subject} {verb} the {object}?"
//   Quantitative    "Does the {subject} {verb} {object}?"
//   Perception      "Does the {subject} {verb} the {object}?"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotforge/types.hpp"
#include "cotforge/wire.hpp"

namespace cotforge::synthesis {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct CaptionTooLong : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoTriplesFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSubstitution : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FlipNotGuaranteed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewQuestions : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ImageRef {
    std::string id;  // non-empty; equal ids denote the same image
    std::string uri; // optional locator
};

// Accepted captions are strictly below 150 whitespace tokens.
inline constexpr int kMaxCaptionWords = 150;

struct Caption {
    std::string image_id;
    std::string text;
    int word_count = 0;
};

enum class RelationKind {
    Action,
    State,
    Possession,
    SpatialLocation,
    CausalityEffect,
    Temporal,
    Quantitative,
    Perception,
};

inline constexpr std::array<RelationKind, 8> kAllRelationKinds = {
    RelationKind::Action,          RelationKind::State,
    RelationKind::Possession,      RelationKind::SpatialLocation,
    RelationKind::CausalityEffect, RelationKind::Temporal,
    RelationKind::Quantitative,    RelationKind::Perception,
};

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_kind_from_string(std::string_view s);

struct Triple {
    std::string subject;
    RelationKind kind = RelationKind::Action;
    std::string surface; // verb/attribute as it appeared in the caption
    std::string object;
};

enum class Polarity { original, negative };

struct AtomicQA {
    std::string question; // always ends with '?'
    Answer answer = Answer::yes;
    Triple source_triple;
    Polarity polarity = Polarity::original;
    // (from, to) of the single substitution; present iff polarity == negative
    std::optional<std::pair<std::string, std::string>> substituted_token;
};

// Token -> ordered replacement candidates. Lookup is case-insensitive;
// replacements preserve the casing of the original token's first letter.
// A token never maps to itself.
class SubstitutionLexicon {
public:
    // Throws std::invalid_argument if any replacement equals its token
    // (case-insensitively).
    void add(const std::string& token, std::vector<std::string> replacements);

    const std::vector<std::string>* find(std::string_view token) const;
    bool empty() const { return entries_.empty(); }

    // Small default lexicon covering the mock word lists.
    static SubstitutionLexicon builtin();

private:
    std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
};

struct ProviderConfig {
    enum class Mode { mock, remote };
    Mode mode = Mode::mock;
    std::string endpoint;   // required in remote mode
    std::string auth_token; // optional
    uint64_t seed = 0;      // mock mode only
    int timeout_s = 30;
    int retries = 0;
    int max_in_flight = 4; // bound on concurrent remote requests
};

// Word lists backing the mock provider. Replaceable in tests.
struct MockLists {
    std::vector<std::string> nouns;
    std::vector<std::string> verbs;
    static MockLists builtin();
};

// ---------------------------------------------------------------------------
// Provider
// ---------------------------------------------------------------------------

// Immutable after construction; safe to share across threads. Remote calls
// are bounded to config.max_in_flight concurrent requests.
class Provider {
public:
    explicit Provider(ProviderConfig config, MockLists lists = MockLists::builtin());
    ~Provider();
    Provider(const Provider&) = delete;
    Provider& operator=(const Provider&) = delete;

    const ProviderConfig& config() const { return config_; }

    Caption generate_caption(const ImageRef& image) const;
    std::vector<Triple> extract_triples(const Caption& caption) const;
    std::string compose_compound(const std::vector<AtomicQA>& questions) const;

private:
    nlohmann::json remote_call(const std::string& task, nlohmann::json input,
                               nlohmann::json params) const;

    ProviderConfig config_;
    MockLists lists_;
    struct InFlightGate;
    std::unique_ptr<InFlightGate> gate_;
};

// ---------------------------------------------------------------------------
// Pure operations (no provider involved)
// ---------------------------------------------------------------------------

// Renders the per-kind template; answer is yes, polarity original.
// Total over all eight relation kinds.
AtomicQA generate_atomic_qa(const Triple& triple);

// Strips third-person singular -s from a verb form:
//   irregulars has->have, is->be, does->do; *ies -> *y; *ches/*shes/*sses/
//   *xes/*zes/*oes -> drop "es"; *s (not *ss) -> drop "s".
std::string strip_third_person(std::string_view verb);

// The relation token as it appears in the rendered question (the stripped
// verb for Does-templates, the raw surface for Is-templates).
std::string question_relation_token(const Triple& triple);

// Flips one answer-determining token of an original-polarity question.
// Candidate tokens are tried object-entity first, then the relation token,
// leftmost occurrence first. A replacement is valid only when it does not
// occur as subject or object of any triple in image_facts whose subject
// matches qa.source_triple.subject (so the altered question cannot still be
// true of the image).
//
// Throws NoSubstitution when no candidate token is in the lexicon, and
// FlipNotGuaranteed when every candidate replacement is contradicted by
// image_facts.
AtomicQA make_lexical_negative(const AtomicQA& qa, const SubstitutionLexicon& lexicon,
                               const std::vector<Triple>& image_facts);

// Enumerates up to max_count distinct valid negatives in the same
// deterministic candidate order. Same error conditions when none exist.
std::vector<AtomicQA> make_lexical_negatives(const AtomicQA& qa,
                                             const SubstitutionLexicon& lexicon,
                                             const std::vector<Triple>& image_facts,
                                             int max_count);

// Deterministic compound-question text rule shared by the mock provider and
// the tree builder.
std::string compose_question_texts(const std::vector<std::string>& questions);

// Whitespace token count (the Caption word_count rule).
int count_words(std::string_view text);

} // namespace cotforge::synthesis
