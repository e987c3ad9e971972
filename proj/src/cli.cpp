#include "cotforge/cli.hpp"

#include <chrono>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotforge/bench.hpp"
#include "cotforge/config.hpp"
#include "cotforge/grpo.hpp"
#include "cotforge/io.hpp"
#include "cotforge/prng.hpp"
#include "cotforge/reward.hpp"
#include "cotforge/synthesis.hpp"
#include "cotforge/treebuild.hpp"
#include "cotforge/wire.hpp"

namespace cotforge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

class ManifestWriter {
public:
    ManifestWriter(std::string command, const config::AppConfig& cfg)
        : start_(std::chrono::steady_clock::now()) {
        manifest_["command"] = std::move(command);
        manifest_["config"] = config::to_json(cfg);
        manifest_["seeds"] = json::object();
        manifest_["inputs"] = json::object();
        manifest_["outputs"] = json::array();
    }

    void seed(const std::string& name, uint64_t value) { manifest_["seeds"][name] = value; }
    void input(const fs::path& path) { manifest_["inputs"][path.string()] = io::file_digest(path); }
    void output(const fs::path& path) { manifest_["outputs"].push_back(path.string()); }

    void write(const fs::path& path) {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_["duration_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        io::atomic_write(path, manifest_.dump(2) + "\n");
    }

private:
    json manifest_;
    std::chrono::steady_clock::time_point start_;
};

fs::path default_manifest_path(const fs::path& primary_output) {
    fs::path p = primary_output;
    p.replace_extension(".manifest.json");
    return p;
}

// ---------------------------------------------------------------------------
// Shared option state
// ---------------------------------------------------------------------------

struct CommonOptions {
    std::string config_path;
    std::string manifest_path;

    config::AppConfig load() const {
        if (!config_path.empty()) {
            return config::load_config(config_path);
        }
        config::AppConfig cfg;
        config::apply_env_overrides(cfg);
        cfg.validate();
        return cfg;
    }
};

synthesis::SubstitutionLexicon load_lexicon(const std::string& path) {
    if (path.empty()) {
        return synthesis::SubstitutionLexicon::builtin();
    }
    json j = json::parse(io::read_file(path));
    synthesis::SubstitutionLexicon lexicon;
    for (const auto& [token, replacements] : j.items()) {
        lexicon.add(token, replacements.get<std::vector<std::string>>());
    }
    return lexicon;
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

struct SynthesizeOptions {
    CommonOptions common;
    std::string images_path;
    std::string out_dir;
    std::string lexicon_path;
    std::optional<int> neg_per_pos;
    std::optional<uint64_t> seed;
};

int run_synthesize(const SynthesizeOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    if (opts.seed) cfg.provider.seed = *opts.seed;
    const int neg_per_pos = opts.neg_per_pos.value_or(cfg.neg_per_pos);
    if (neg_per_pos < 0) throw config::InvariantViolation("neg-per-pos must be nonnegative");

    ManifestWriter manifest("synthesize", cfg);
    manifest.seed("provider", cfg.provider.seed);
    manifest.input(opts.images_path);

    const synthesis::Provider provider(cfg.provider);
    const synthesis::SubstitutionLexicon lexicon = load_lexicon(opts.lexicon_path);

    std::vector<json> triple_rows;
    std::vector<json> qa_rows;
    for (const synthesis::ImageRef& image : io::read_image_list(opts.images_path)) {
        const synthesis::Caption caption = provider.generate_caption(image);
        std::vector<synthesis::Triple> triples;
        try {
            triples = provider.extract_triples(caption);
        } catch (const synthesis::NoTriplesFound&) {
            std::cerr << "note: no triples for image '" << image.id << "', skipping\n";
            continue;
        }

        for (const synthesis::Triple& triple : triples) {
            const int triple_index = static_cast<int>(triple_rows.size());
            triple_rows.push_back(io::to_json(io::TripleRow{image.id, triple}));

            const synthesis::AtomicQA original = synthesis::generate_atomic_qa(triple);
            qa_rows.push_back(io::to_json(io::QARow{image.id, original, triple_index}));
            if (neg_per_pos == 0) continue;
            try {
                for (const synthesis::AtomicQA& negative :
                     synthesis::make_lexical_negatives(original, lexicon, triples, neg_per_pos)) {
                    qa_rows.push_back(io::to_json(io::QARow{image.id, negative, triple_index}));
                }
            } catch (const synthesis::NoSubstitution&) {
                std::cerr << "note: no lexicon entry for '" << original.question << "'\n";
            } catch (const synthesis::FlipNotGuaranteed&) {
                std::cerr << "note: no safe substitution for '" << original.question << "'\n";
            }
        }
    }

    const fs::path out_dir(opts.out_dir);
    const fs::path triples_path = out_dir / "triples.jsonl";
    const fs::path qa_path = out_dir / "qa.jsonl";
    io::write_jsonl(triples_path, triple_rows);
    io::write_jsonl(qa_path, qa_rows);
    manifest.output(triples_path);
    manifest.output(qa_path);
    manifest.write(opts.common.manifest_path.empty() ? out_dir / "manifest.json"
                                                     : fs::path(opts.common.manifest_path));
    std::cout << "wrote " << triple_rows.size() << " triples, " << qa_rows.size()
              << " qa rows to " << out_dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// build-tree
// ---------------------------------------------------------------------------

struct BuildTreeOptions {
    CommonOptions common;
    std::string qa_path;
    std::string out_path;
    std::optional<int> merge_min;
    std::optional<int> merge_max;
    std::optional<uint64_t> seed;
    bool cross_image = false; // experimental: one tree over all images
};

int run_build_tree(const BuildTreeOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    std::pair<int, int> merge_range = cfg.merge_range;
    if (opts.merge_min) merge_range.first = *opts.merge_min;
    if (opts.merge_max) merge_range.second = *opts.merge_max;
    const uint64_t seed = opts.seed.value_or(cfg.provider.seed);

    ManifestWriter manifest("build-tree", cfg);
    manifest.seed("tree", seed);
    manifest.input(opts.qa_path);

    // Group leaves by image in first-appearance order.
    std::vector<std::string> image_order;
    std::map<std::string, std::vector<synthesis::AtomicQA>> by_image;
    for (const json& row : io::read_jsonl(opts.qa_path)) {
        io::QARow qa = io::qa_row_from_json(row);
        const std::string key = opts.cross_image ? std::string("*") : qa.image_id;
        if (by_image.find(key) == by_image.end()) image_order.push_back(key);
        by_image[key].push_back(std::move(qa.qa));
    }
    if (image_order.empty()) {
        throw treebuild::EmptyLeafSet("qa file contains no questions");
    }

    const treebuild::Embedder embedder(cfg.embedder);
    std::vector<treebuild::QuestionTree> trees;
    for (const std::string& key : image_order) {
        trees.push_back(treebuild::build_tree(by_image[key], merge_range, seed, embedder));
    }
    const treebuild::QuestionTree forest = treebuild::merge_forest(trees);
    treebuild::validate_tree(forest);

    io::atomic_write(opts.out_path, io::to_json(forest).dump(2) + "\n");
    manifest.output(opts.out_path);
    manifest.write(opts.common.manifest_path.empty() ? default_manifest_path(opts.out_path)
                                                     : fs::path(opts.common.manifest_path));
    std::cout << "wrote tree with " << forest.nodes.size() << " nodes (" << forest.roots.size()
              << " roots) to " << opts.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeOptions {
    CommonOptions common;
    std::string tree_path;
    std::string out_path;
};

int run_decompose(const DecomposeOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    ManifestWriter manifest("decompose", cfg);
    manifest.input(opts.tree_path);

    const treebuild::QuestionTree tree =
        io::tree_from_json(json::parse(io::read_file(opts.tree_path)));
    const std::vector<treebuild::CoTRecord> records = treebuild::decompose(tree);

    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& record : records) rows.push_back(io::to_json(record));
    io::write_jsonl(opts.out_path, rows);

    manifest.output(opts.out_path);
    manifest.write(opts.common.manifest_path.empty() ? default_manifest_path(opts.out_path)
                                                     : fs::path(opts.common.manifest_path));
    std::cout << "wrote " << rows.size() << " cot records to " << opts.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
    CommonOptions common;
    std::string responses_path;
    std::string refs_path;
    std::string out_path;
};

int run_score(const ScoreOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    ManifestWriter manifest("score", cfg);
    manifest.input(opts.responses_path);
    manifest.input(opts.refs_path);

    struct Ref {
        Answer ground_truth;
        std::string ref_chain;
    };
    std::map<std::string, Ref> refs;
    for (const json& row : io::read_jsonl(opts.refs_path)) {
        auto gt = answer_from_string(row.at("ground_truth").get<std::string>());
        if (!gt) throw config::InvariantViolation("ground_truth must be \"yes\" or \"no\"");
        refs[row.at("id").get<std::string>()] = Ref{*gt, row.at("ref_chain").get<std::string>()};
    }

    const treebuild::Embedder embedder(cfg.embedder);
    std::vector<json> out_rows;
    for (const json& row : io::read_jsonl(opts.responses_path)) {
        const std::string id = row.at("id").get<std::string>();
        const auto it = refs.find(id);
        if (it == refs.end()) {
            throw config::InvariantViolation("no reference for response id '" + id + "'");
        }
        const reward::RewardBreakdown breakdown =
            reward::ccvr_reward(row.at("raw_response").get<std::string>(), it->second.ground_truth,
                                it->second.ref_chain, cfg.ccvr, embedder);
        out_rows.push_back(io::to_json(id, breakdown));
    }

    io::write_jsonl(opts.out_path, out_rows);
    manifest.output(opts.out_path);
    manifest.write(opts.common.manifest_path.empty() ? default_manifest_path(opts.out_path)
                                                     : fs::path(opts.common.manifest_path));
    std::cout << "wrote " << out_rows.size() << " reward rows to " << opts.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-toy
// ---------------------------------------------------------------------------

struct TrainToyOptions {
    CommonOptions common;
    std::string report_path;
    std::optional<std::string> mode;
    std::optional<int> K;
    std::optional<double> beta;
    std::optional<double> lr;
    std::optional<int> steps;
    std::optional<uint64_t> seed;
};

int run_train_toy(const TrainToyOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    if (opts.mode) {
        if (*opts.mode == "alg1") {
            cfg.grpo.mode = grpo::GRPOConfig::Mode::alg1;
        } else if (*opts.mode == "eq5") {
            cfg.grpo.mode = grpo::GRPOConfig::Mode::eq5;
        } else {
            throw config::InvariantViolation("mode must be \"alg1\" or \"eq5\"");
        }
    }
    if (opts.K) cfg.grpo.K = *opts.K;
    if (opts.beta) cfg.grpo.beta = *opts.beta;
    if (opts.lr) cfg.grpo.learning_rate = *opts.lr;
    if (opts.steps) cfg.grpo.steps = *opts.steps;
    if (opts.seed) cfg.grpo.seed = *opts.seed;
    cfg.validate();

    ManifestWriter manifest("train-toy", cfg);
    manifest.seed("grpo", cfg.grpo.seed);

    const grpo::MicroTask task = grpo::MicroTask::builtin();
    const grpo::TrainReport report = grpo::train_toy(task, cfg.grpo, cfg.ccvr);

    json steps = json::array();
    for (const auto& s : report.steps) {
        steps.push_back({{"step", s.step},
                         {"mean_reward", s.mean_reward},
                         {"loss", s.loss},
                         {"grad_norm", s.grad_norm}});
    }
    const json doc{{"mode", cfg.grpo.mode == grpo::GRPOConfig::Mode::alg1 ? "alg1" : "eq5"},
                   {"steps", std::move(steps)}};
    io::atomic_write(opts.report_path, doc.dump(2) + "\n");

    manifest.output(opts.report_path);
    manifest.write(opts.common.manifest_path.empty() ? default_manifest_path(opts.report_path)
                                                     : fs::path(opts.common.manifest_path));
    if (!report.steps.empty()) {
        std::cout << "final mean reward " << report.steps.back().mean_reward << " after "
                  << report.steps.size() << " steps\n";
    } else {
        std::cout << "no steps run\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
    CommonOptions common;
    std::string pred_path;
    std::string gold_path;
    std::string out_path;
    bool macro_f1 = false;
};

int run_eval(const EvalOptions& opts) {
    config::AppConfig cfg = opts.common.load();
    ManifestWriter manifest("eval", cfg);
    manifest.input(opts.pred_path);
    manifest.input(opts.gold_path);

    std::map<std::string, Answer> predictions;
    for (const json& row : io::read_jsonl(opts.pred_path)) {
        auto prediction = answer_from_string(row.at("prediction").get<std::string>());
        if (!prediction) throw config::InvariantViolation("prediction must be \"yes\" or \"no\"");
        predictions[row.at("id").get<std::string>()] = *prediction;
    }
    std::vector<bench::EvalItem> items;
    for (const json& row : io::read_jsonl(opts.gold_path)) {
        items.push_back(io::eval_item_from_json(row));
    }

    const bench::EvalReport report = bench::evaluate(predictions, items, opts.macro_f1);
    io::atomic_write(opts.out_path, io::to_json(report).dump(2) + "\n");

    manifest.output(opts.out_path);
    manifest.write(opts.common.manifest_path.empty() ? default_manifest_path(opts.out_path)
                                                     : fs::path(opts.common.manifest_path));
    std::cout << "acc " << report.total.acc << ", f1 " << report.total.f1 << " over "
              << report.total.counts.total() << " items\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config_path, "JSON config file (empty file = defaults)");
    cmd->add_option("--manifest", common.manifest_path, "run manifest path override");
}

} // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv) {
    CLI::App app{"cotforge: hierarchical chain-of-thought data synthesis, CCVR scoring, and toy "
                 "GRPO training"};
    app.require_subcommand(1);

    SynthesizeOptions synth;
    auto* synth_cmd = app.add_subcommand(
        "synthesize", "images -> captions -> triples -> atomic yes/no QA with negatives");
    add_common(synth_cmd, synth.common);
    synth_cmd->add_option("--images", synth.images_path, "image list, one id<TAB>uri per line")
        ->required();
    synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--lexicon", synth.lexicon_path,
                          "substitution lexicon JSON {token: [replacements]}");
    synth_cmd->add_option("--neg-per-pos", synth.neg_per_pos, "negatives per positive question");
    synth_cmd->add_option("--seed", synth.seed, "mock provider seed");

    BuildTreeOptions build;
    auto* build_cmd =
        app.add_subcommand("build-tree", "merge atomic questions bottom-up into a hierarchy");
    add_common(build_cmd, build.common);
    build_cmd->add_option("--qa", build.qa_path, "qa.jsonl from synthesize")->required();
    build_cmd->add_option("--out", build.out_path, "tree.json output path")->required();
    build_cmd->add_option("--merge-min", build.merge_min, "min nodes per merge");
    build_cmd->add_option("--merge-max", build.merge_max, "max nodes per merge");
    build_cmd->add_option("--seed", build.seed, "merge PRNG seed");
    build_cmd->add_flag("--cross-image", build.cross_image,
                        "experimental: one tree across all images");

    DecomposeOptions decomp;
    auto* decomp_cmd =
        app.add_subcommand("decompose", "emit one CoT record per internal tree node");
    add_common(decomp_cmd, decomp.common);
    decomp_cmd->add_option("--tree", decomp.tree_path, "tree.json from build-tree")->required();
    decomp_cmd->add_option("--out", decomp.out_path, "cot.jsonl output path")->required();

    ScoreOptions score;
    auto* score_cmd = app.add_subcommand("score", "CCVR rewards for tagged responses");
    add_common(score_cmd, score.common);
    score_cmd->add_option("--responses", score.responses_path, "responses.jsonl {id, raw_response}")
        ->required();
    score_cmd->add_option("--refs", score.refs_path, "refs.jsonl {id, ground_truth, ref_chain}")
        ->required();
    score_cmd->add_option("--out", score.out_path, "rewards.jsonl output path")->required();

    TrainToyOptions train;
    auto* train_cmd =
        app.add_subcommand("train-toy", "run the toy GRPO loop with CCVR rewards");
    add_common(train_cmd, train.common);
    train_cmd->add_option("--report", train.report_path, "per-step report output path")
        ->required();
    train_cmd->add_option("--mode", train.mode, "alg1 (REINFORCE baseline) or eq5 (GRPO loss)");
    train_cmd->add_option("--K", train.K, "trajectories per group");
    train_cmd->add_option("--beta", train.beta, "KL coefficient (eq5)");
    train_cmd->add_option("--lr", train.lr, "learning rate");
    train_cmd->add_option("--steps", train.steps, "training steps");
    train_cmd->add_option("--seed", train.seed, "sampling seed");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "accuracy/F1 over splits and difficulty levels");
    add_common(eval_cmd, eval.common);
    eval_cmd->add_option("--pred", eval.pred_path, "pred.jsonl {id, prediction}")->required();
    eval_cmd->add_option("--gold", eval.gold_path, "gold.jsonl {id, gold, split, difficulty}")
        ->required();
    eval_cmd->add_option("--out", eval.out_path, "metrics.json output path")->required();
    eval_cmd->add_flag("--macro-f1", eval.macro_f1, "also report macro-averaged F1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (synth_cmd->parsed()) return run_synthesize(synth);
        if (build_cmd->parsed()) return run_build_tree(build);
        if (decomp_cmd->parsed()) return run_decompose(decomp);
        if (score_cmd->parsed()) return run_score(score);
        if (train_cmd->parsed()) return run_train_toy(train);
        if (eval_cmd->parsed()) return run_eval(eval);
        std::cerr << app.help() << std::flush;
        return 1;
    } catch (const wire::RemoteUnavailable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const synthesis::CaptionTooLong& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace cotforge::cli
