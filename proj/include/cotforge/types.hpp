#pragma once
// Shared vocabulary types for the yes/no question pipeline.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cotforge {

enum class Answer { yes, no };

inline std::string_view to_string(Answer a) {
    return a == Answer::yes ? "yes" : "no";
}

inline std::optional<Answer> answer_from_string(std::string_view s) {
    if (s == "yes") return Answer::yes;
    if (s == "no") return Answer::no;
    return std::nullopt;
}

// Conjunction over the binary answer space: a compound question is true
// only when every constituent is true.
inline Answer operator&&(Answer a, Answer b) {
    return (a == Answer::yes && b == Answer::yes) ? Answer::yes : Answer::no;
}

} // namespace cotforge
