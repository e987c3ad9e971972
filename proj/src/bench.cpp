#include "cotforge/bench.hpp"

#include <set>

namespace cotforge::bench {

std::string_view to_string(Split split) {
    return split == Split::in_domain ? "in_domain" : "out_of_domain";
}

std::optional<Split> split_from_string(std::string_view s) {
    if (s == "in_domain") return Split::in_domain;
    if (s == "out_of_domain") return Split::out_of_domain;
    return std::nullopt;
}

namespace {

double f1_from(long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) return 1.0; // no positive activity at all: nothing was missed
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

Metrics finalize(const Confusion& c, bool with_macro_f1) {
    Metrics m;
    m.counts = c;
    m.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.f1 = f1_from(c.tp, c.fp, c.fn);
    if (with_macro_f1) {
        // "no" as positive class swaps tp<->tn and fp<->fn.
        m.macro_f1 = 0.5 * (m.f1 + f1_from(c.tn, c.fn, c.fp));
    }
    return m;
}

} // namespace

EvalReport evaluate(const std::map<std::string, Answer>& predictions,
                    const std::vector<EvalItem>& items, bool with_macro_f1) {
    if (items.empty()) {
        throw EmptySet("evaluate requires at least one item");
    }

    std::set<std::string> seen;
    std::string missing;
    for (const EvalItem& item : items) {
        if (!seen.insert(item.id).second) {
            throw DuplicateId("duplicate item id '" + item.id + "'");
        }
        if (predictions.find(item.id) == predictions.end()) {
            missing += missing.empty() ? item.id : ", " + item.id;
        }
    }
    if (!missing.empty()) {
        throw MissingPrediction("missing predictions for: " + missing);
    }

    Confusion total;
    std::map<Split, Confusion> per_split;
    std::map<int, Confusion> per_difficulty;
    for (const EvalItem& item : items) {
        const Answer predicted = predictions.at(item.id);
        auto bump = [&](Confusion& c) {
            if (item.gold == Answer::yes) {
                (predicted == Answer::yes ? c.tp : c.fn) += 1;
            } else {
                (predicted == Answer::yes ? c.fp : c.tn) += 1;
            }
        };
        bump(total);
        bump(per_split[item.split]);
        bump(per_difficulty[item.difficulty]);
    }

    EvalReport report;
    report.total = finalize(total, with_macro_f1);
    for (const auto& [split, confusion] : per_split) {
        report.per_split[split] = finalize(confusion, with_macro_f1);
    }
    for (const auto& [difficulty, confusion] : per_difficulty) {
        report.per_difficulty[difficulty] = finalize(confusion, with_macro_f1);
    }
    return report;
}

} // namespace cotforge::bench
