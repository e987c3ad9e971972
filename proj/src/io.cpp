#include "cotforge/io.hpp"

#include <fstream>
#include <sstream>

#include "cotforge/prng.hpp"

namespace cotforge::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Low-level file helpers
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError("failed reading " + path.string());
    }
    return buffer.str();
}

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.is_open()) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out.good()) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw IoError("failed renaming " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

std::string file_digest(const fs::path& path) {
    const uint64_t digest = fnv1a64(read_file(path));
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(digest));
    return std::string(buffer);
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(read_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            rows.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const fs::path& path, const std::vector<nlohmann::json>& rows) {
    std::string content;
    for (const auto& row : rows) {
        content += row.dump();
        content += '\n';
    }
    atomic_write(path, content);
}

// ---------------------------------------------------------------------------
// Codecs
// ---------------------------------------------------------------------------

std::vector<synthesis::ImageRef> read_image_list(const fs::path& path) {
    std::vector<synthesis::ImageRef> images;
    std::istringstream in(read_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        synthesis::ImageRef image;
        image.id = tab == std::string::npos ? line : line.substr(0, tab);
        image.uri = tab == std::string::npos ? std::string() : line.substr(tab + 1);
        if (image.id.empty()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": empty image id");
        }
        images.push_back(std::move(image));
    }
    return images;
}

namespace {

Answer require_answer(const nlohmann::json& j, const std::string& field) {
    auto parsed = answer_from_string(j.at(field).get<std::string>());
    if (!parsed) throw IoError("field '" + field + "' must be \"yes\" or \"no\"");
    return *parsed;
}

synthesis::RelationKind require_kind(const std::string& s) {
    auto kind = synthesis::relation_kind_from_string(s);
    if (!kind) throw IoError("unknown relation kind '" + s + "'");
    return *kind;
}

} // namespace

nlohmann::json to_json(const TripleRow& row) {
    return {{"image_id", row.image_id},
            {"subject", row.triple.subject},
            {"relation_kind", std::string(synthesis::to_string(row.triple.kind))},
            {"relation_surface", row.triple.surface},
            {"object", row.triple.object}};
}

TripleRow triple_row_from_json(const nlohmann::json& j) {
    TripleRow row;
    row.image_id = j.at("image_id").get<std::string>();
    row.triple.subject = j.at("subject").get<std::string>();
    row.triple.kind = require_kind(j.at("relation_kind").get<std::string>());
    row.triple.surface = j.at("relation_surface").get<std::string>();
    row.triple.object = j.at("object").get<std::string>();
    return row;
}

nlohmann::json to_json(const QARow& row) {
    nlohmann::json j{
        {"image_id", row.image_id},
        {"question", row.qa.question},
        {"answer", std::string(to_string(row.qa.answer))},
        {"polarity", row.qa.polarity == synthesis::Polarity::original ? "original" : "negative"},
        {"substituted_from", nullptr},
        {"substituted_to", nullptr},
        {"source_triple", row.source_triple},
    };
    if (row.qa.substituted_token) {
        j["substituted_from"] = row.qa.substituted_token->first;
        j["substituted_to"] = row.qa.substituted_token->second;
    }
    return j;
}

QARow qa_row_from_json(const nlohmann::json& j) {
    QARow row;
    row.image_id = j.at("image_id").get<std::string>();
    row.qa.question = j.at("question").get<std::string>();
    row.qa.answer = require_answer(j, "answer");
    const std::string polarity = j.at("polarity").get<std::string>();
    if (polarity == "original") {
        row.qa.polarity = synthesis::Polarity::original;
    } else if (polarity == "negative") {
        row.qa.polarity = synthesis::Polarity::negative;
    } else {
        throw IoError("unknown polarity '" + polarity + "'");
    }
    if (!j.at("substituted_from").is_null()) {
        row.qa.substituted_token = std::make_pair(j.at("substituted_from").get<std::string>(),
                                                  j.at("substituted_to").get<std::string>());
    }
    row.source_triple = j.at("source_triple").get<int>();
    return row;
}

nlohmann::json to_json(const treebuild::QuestionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
        nlohmann::json n{{"id", node.id},
                         {"text", node.text},
                         {"children", node.children},
                         {"level", node.level}};
        if (node.answer) n["answer"] = std::string(to_string(*node.answer));
        nodes.push_back(std::move(n));
    }
    return {{"seed", tree.seed},
            {"merge_range", {tree.merge_range.first, tree.merge_range.second}},
            {"roots", tree.roots},
            {"nodes", std::move(nodes)}};
}

treebuild::QuestionTree tree_from_json(const nlohmann::json& j) {
    treebuild::QuestionTree tree;
    tree.seed = j.at("seed").get<uint64_t>();
    tree.merge_range = {j.at("merge_range").at(0).get<int>(), j.at("merge_range").at(1).get<int>()};
    tree.roots = j.at("roots").get<std::vector<int>>();
    for (const auto& n : j.at("nodes")) {
        treebuild::QuestionNode node;
        node.id = n.at("id").get<int>();
        node.text = n.at("text").get<std::string>();
        node.children = n.at("children").get<std::vector<int>>();
        node.level = n.at("level").get<int>();
        if (n.contains("answer")) node.answer = require_answer(n, "answer");
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

nlohmann::json to_json(const treebuild::CoTRecord& record) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : record.steps) {
        steps.push_back({{"q", step.question}, {"a", std::string(to_string(step.answer))}});
    }
    return {{"compound_question", record.compound_question},
            {"steps", std::move(steps)},
            {"final_answer", std::string(to_string(record.final_answer))},
            {"depth", record.depth}};
}

treebuild::CoTRecord cot_record_from_json(const nlohmann::json& j) {
    treebuild::CoTRecord record;
    record.compound_question = j.at("compound_question").get<std::string>();
    for (const auto& s : j.at("steps")) {
        record.steps.push_back(
            treebuild::CoTStep{s.at("q").get<std::string>(), require_answer(s, "a")});
    }
    record.final_answer = require_answer(j, "final_answer");
    record.depth = j.at("depth").get<int>();
    return record;
}

nlohmann::json to_json(const std::string& id, const reward::RewardBreakdown& b) {
    return {{"id", id},
            {"format", b.format},
            {"answer", b.answer},
            {"semantic", b.semantic},
            {"semantic_raw", b.semantic_raw},
            {"edit", b.edit},
            {"process", b.process},
            {"total", b.total},
            {"edit_distance_raw", b.edit_distance_raw}};
}

nlohmann::json to_json(const bench::EvalItem& item) {
    return {{"id", item.id},
            {"gold", std::string(to_string(item.gold))},
            {"split", std::string(to_string(item.split))},
            {"difficulty", item.difficulty}};
}

bench::EvalItem eval_item_from_json(const nlohmann::json& j) {
    bench::EvalItem item;
    item.id = j.at("id").get<std::string>();
    item.gold = require_answer(j, "gold");
    auto split = bench::split_from_string(j.at("split").get<std::string>());
    if (!split) throw IoError("unknown split '" + j.at("split").get<std::string>() + "'");
    item.split = *split;
    item.difficulty = j.at("difficulty").get<int>();
    return item;
}

namespace {

nlohmann::json metrics_to_json(const bench::Metrics& m) {
    nlohmann::json j{{"acc", m.acc},       {"f1", m.f1},       {"tp", m.counts.tp},
                     {"fp", m.counts.fp},  {"fn", m.counts.fn}, {"tn", m.counts.tn}};
    if (m.macro_f1) j["macro_f1"] = *m.macro_f1;
    return j;
}

} // namespace

nlohmann::json to_json(const bench::EvalReport& report) {
    nlohmann::json difficulty = nlohmann::json::object();
    for (const auto& [level, metrics] : report.per_difficulty) {
        difficulty[std::to_string(level)] = metrics_to_json(metrics);
    }
    nlohmann::json j{{"total", metrics_to_json(report.total)},
                     {"difficulty", std::move(difficulty)}};
    for (const auto& [split, metrics] : report.per_split) {
        j[std::string(bench::to_string(split))] = metrics_to_json(metrics);
    }
    return j;
}

} // namespace cotforge::io
