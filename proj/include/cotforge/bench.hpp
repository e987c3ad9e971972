#pragma once
// Yes/no prediction scoring: accuracy and F1 over total, per-split, and
// per-difficulty slices. Positive class is "yes".

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotforge/types.hpp"

namespace cotforge::bench {

struct MissingPrediction : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateId : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Split { in_domain, out_of_domain };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view s);

struct EvalItem {
    std::string id; // unique within a set
    Answer gold = Answer::yes;
    Split split = Split::in_domain;
    int difficulty = 0; // number of positive distractors
};

struct Confusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
};

struct Metrics {
    double acc = 0.0;
    double f1 = 0.0; // binary, positive class "yes"
    Confusion counts;
    std::optional<double> macro_f1; // populated on request only
};

struct EvalReport {
    Metrics total;
    std::map<Split, Metrics> per_split;
    std::map<int, Metrics> per_difficulty;
};

// Every item id must appear in predictions (MissingPrediction lists absent
// ids). acc = (tp+tn)/total, f1 = 2tp/(2tp+fp+fn). A slice with no positive
// activity (tp = fp = fn = 0) gets f1 = 1.0: all-negative predictions over
// all-negative gold are perfect. macro_f1, when requested, averages the
// per-class F1 of "yes" and "no".
EvalReport evaluate(const std::map<std::string, Answer>& predictions,
                    const std::vector<EvalItem>& items, bool with_macro_f1 = false);

} // namespace cotforge::bench
