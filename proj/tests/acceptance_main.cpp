// Acceptance suite: one line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotforge/bench.hpp"
#include "cotforge/cli.hpp"
#include "cotforge/grpo.hpp"
#include "cotforge/io.hpp"
#include "cotforge/prng.hpp"
#include "cotforge/reward.hpp"
#include "cotforge/synthesis.hpp"
#include "cotforge/treebuild.hpp"

using namespace cotforge;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& why) {
        if (!condition && ok) {
            ok = false;
            detail = why;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

treebuild::Embedder make_reference_embedder() {
    return treebuild::Embedder(treebuild::EmbedderConfig{});
}

// Random sentence lists over a fixed 5-word vocabulary.
reward::SentenceList draw_sentences(SplitMix64& rng, size_t min_len, size_t max_len) {
    static const std::vector<std::string> vocab{"alpha", "bravo", "charlie", "delta", "echo"};
    reward::SentenceList list;
    const size_t len = min_len + rng.next_in(0, max_len - min_len);
    for (size_t i = 0; i < len; ++i) {
        std::string sentence;
        const size_t words = 1 + rng.next_in(0, 2);
        for (size_t w = 0; w < words; ++w) {
            if (w > 0) sentence += ' ';
            sentence += vocab[rng.next_in(0, vocab.size() - 1)];
        }
        list.push_back(sentence);
    }
    return list;
}

// ---------------------------------------------------------------------------
// 1. Soft edit distance vs memoized recursive oracle
// ---------------------------------------------------------------------------

double recursive_soft_edit(const std::vector<std::vector<double>>& sim, size_t i, size_t j,
                           double theta,
                           std::map<std::pair<size_t, size_t>, double>& memo) {
    if (i == 0) return static_cast<double>(j);
    if (j == 0) return static_cast<double>(i);
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double value;
    if (sim[i - 1][j - 1] >= theta) {
        value = recursive_soft_edit(sim, i - 1, j - 1, theta, memo);
    } else {
        value = 1.0 + std::min({recursive_soft_edit(sim, i - 1, j, theta, memo),
                                recursive_soft_edit(sim, i, j - 1, theta, memo),
                                recursive_soft_edit(sim, i - 1, j - 1, theta, memo)});
    }
    memo[key] = value;
    return value;
}

Check criterion_soft_edit_oracle() {
    Check check;
    const auto start = Clock::now();
    const auto embedder = make_reference_embedder();
    const double theta = 0.7;

    auto oracle = [&](const reward::SentenceList& gen, const reward::SentenceList& ref) {
        std::vector<std::vector<double>> sim(gen.size(), std::vector<double>(ref.size()));
        for (size_t i = 0; i < gen.size(); ++i) {
            for (size_t j = 0; j < ref.size(); ++j) {
                sim[i][j] = treebuild::cosine(embedder.embed(gen[i]), embedder.embed(ref[j]));
            }
        }
        std::map<std::pair<size_t, size_t>, double> memo;
        return recursive_soft_edit(sim, gen.size(), ref.size(), theta, memo);
    };

    SplitMix64 rng(20250801);
    for (int trial = 0; trial < 200; ++trial) {
        const reward::SentenceList gen = draw_sentences(rng, 0, 6);
        const reward::SentenceList ref = draw_sentences(rng, 1, 6);
        const auto got = reward::soft_edit_distance(gen, ref, theta, embedder);
        check.require(got.distance == oracle(gen, ref),
                      "random trial " + std::to_string(trial) + " diverged from the oracle");
        check.require(got.distance == std::floor(got.distance), "distance must be integer-valued");
    }

    // Worked examples.
    const reward::SentenceList chain{"the cat sits", "the dog runs"};
    check.require(reward::soft_edit_distance(chain, chain, theta, embedder).distance == 0.0,
                  "identical chains must have distance 0");
    const auto empty_gen = reward::soft_edit_distance({}, {"a b", "c d", "e f"}, theta, embedder);
    check.require(empty_gen.distance == 3.0 && empty_gen.score == 0.0,
                  "empty gen must hit the border initialization");
    const auto partial = reward::soft_edit_distance(
        {"the cat sits", "zebra zebra"}, {"the cat sits", "dogs run fast", "birds fly high"},
        theta, embedder);
    check.require(partial.distance == 2.0 && std::abs(partial.score - 1.0 / 3.0) < 1e-12,
                  "partial match example must give D=2, S=1/3");

    check.require(seconds_since(start) < 5.0, "runtime exceeded 5 s");
    return check;
}

// ---------------------------------------------------------------------------
// 2. Semantic score literalism
// ---------------------------------------------------------------------------

Check criterion_semantic_literal() {
    Check check;
    const auto start = Clock::now();
    const auto embedder = make_reference_embedder();
    const double delta = 0.7;

    SplitMix64 rng(20250802);
    for (int trial = 0; trial < 200; ++trial) {
        const reward::SentenceList gen = draw_sentences(rng, 0, 6);
        const reward::SentenceList ref = draw_sentences(rng, 1, 6);

        long count = 0;
        for (const std::string& g : gen) {
            for (const std::string& r : ref) {
                if (treebuild::cosine(embedder.embed(g), embedder.embed(r)) >= delta) ++count;
            }
        }
        const double expected =
            static_cast<double>(count) / static_cast<double>(std::max(gen.size(), ref.size()));
        const auto got = reward::semantic_score(gen, ref, delta, embedder);
        check.require(got.raw == expected,
                      "unclamped semantic score diverged on trial " + std::to_string(trial));
        check.require(got.clamped == std::min(expected, 1.0), "clamp mismatch");
    }

    const auto over = reward::semantic_score({"the cat", "the cat"}, {"the cat", "the cat"},
                                             delta, embedder);
    check.require(over.raw == 2.0 && over.clamped == 1.0,
                  "constructed >1 case must clamp from 2.0 to 1.0");

    check.require(seconds_since(start) < 5.0, "runtime exceeded 5 s");
    return check;
}

// ---------------------------------------------------------------------------
// 3. Advantage normalization
// ---------------------------------------------------------------------------

Check criterion_advantages() {
    Check check;
    const double sigma_floor = 1e-8;
    SplitMix64 rng(20250803);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t k = 2 + rng.next_in(0, 14);
        std::vector<double> rewards;
        for (size_t i = 0; i < k; ++i) rewards.push_back(rng.next_double());

        const auto adv = grpo::group_advantages(rewards, sigma_floor);
        double mean = 0.0;
        for (double a : adv) mean += a;
        mean /= static_cast<double>(k);
        check.require(std::abs(mean) <= 1e-9, "advantage mean above 1e-9");

        double reward_mean = 0.0;
        for (double r : rewards) reward_mean += r;
        reward_mean /= static_cast<double>(k);
        double variance = 0.0;
        for (double r : rewards) variance += (r - reward_mean) * (r - reward_mean);
        const double sigma = std::sqrt(variance / static_cast<double>(k));
        if (sigma > sigma_floor) {
            double adv_var = 0.0;
            for (double a : adv) adv_var += (a - mean) * (a - mean);
            const double adv_sigma = std::sqrt(adv_var / static_cast<double>(k));
            check.require(std::abs(adv_sigma - 1.0) <= 1e-6, "advantage std not within 1e-6 of 1");
        }
    }
    for (double value : {0.0, 0.25, 1.0}) {
        const auto adv = grpo::group_advantages({value, value, value, value}, sigma_floor);
        for (double a : adv) check.require(a == 0.0, "constant group advantage not exactly zero");
    }
    return check;
}

// ---------------------------------------------------------------------------
// 4. KL estimator
// ---------------------------------------------------------------------------

Check criterion_kl() {
    Check check;
    SplitMix64 rng(20250804);
    for (int trial = 0; trial < 10000; ++trial) {
        const double p = 1e-6 + rng.next_double();
        const double q = 1e-6 + rng.next_double();
        check.require(grpo::kl_estimate(p, q) >= 0.0, "kl estimator went negative");
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double p = 1e-6 + rng.next_double();
        check.require(std::abs(grpo::kl_estimate(p, p)) <= 1e-12, "kl(p, p) not ~ 0");
    }
    check.require(std::abs(grpo::kl_estimate(0.1, 0.2) - 0.306853) <= 1e-6,
                  "kl closed form rho=2 mismatch");
    check.require(std::abs(grpo::kl_estimate(0.2, 0.1) - 0.193147) <= 1e-6,
                  "kl closed form rho=0.5 mismatch");
    return check;
}

// ---------------------------------------------------------------------------
// 5. Gradient fidelity (both modes)
// ---------------------------------------------------------------------------

Check criterion_gradients() {
    Check check;
    const auto start = Clock::now();
    const double h = 1e-5;
    auto rel_error = [](double a, double b) {
        return std::abs(a - b) / std::max(std::abs(b), 1e-6);
    };

    SplitMix64 rng(20250805);
    for (int instance = 0; instance < 50; ++instance) {
        const int vocab_size = 3 + static_cast<int>(rng.next_in(0, 2));
        const int max_len = 2 + static_cast<int>(rng.next_in(0, 1));
        std::vector<std::string> vocab;
        for (int i = 0; i < vocab_size; ++i) vocab.push_back("w" + std::to_string(i));

        grpo::ToyPolicy policy = grpo::ToyPolicy::uniform(vocab, max_len, {0});
        grpo::ToyPolicy reference = grpo::ToyPolicy::uniform(vocab, max_len, {0});
        for (auto& row : policy.logits[0]) {
            for (double& logit : row) logit = 2.0 * rng.next_double() - 1.0;
        }
        for (auto& row : reference.logits[0]) {
            for (double& logit : row) logit = 2.0 * rng.next_double() - 1.0;
        }

        grpo::TrajectoryGroup group = grpo::sample_group(
            policy, reference, 0, 2 + static_cast<int>(rng.next_in(0, 2)), rng.next());
        for (auto& traj : group.trajectories) traj.reward = rng.next_double();

        grpo::GRPOConfig cfg;
        cfg.beta = (instance % 3 == 0) ? 0.0 : 0.2;
        cfg.length_normalize = instance % 2 == 0;
        cfg.learning_rate = 1.0;

        // eq5 loss gradient.
        const grpo::LossGrad lg = grpo::grpo_loss(group, policy, reference, cfg);
        for (int t = 0; t < max_len; ++t) {
            for (int v = 0; v < vocab_size; ++v) {
                grpo::ToyPolicy plus = policy;
                plus.logits[0][t][v] += h;
                grpo::ToyPolicy minus = policy;
                minus.logits[0][t][v] -= h;
                const double fd = (grpo::grpo_loss(group, plus, reference, cfg).loss -
                                   grpo::grpo_loss(group, minus, reference, cfg).loss) /
                                  (2 * h);
                check.require(rel_error(lg.grad[t][v], fd) <= 1e-4,
                              "eq5 gradient relative error above 1e-4");
            }
        }

        // alg1 ascent direction = applied update at lr 1.
        auto surrogate = [&group](const grpo::ToyPolicy& p) {
            const auto rewards = group.rewards();
            double mean = 0.0;
            for (double r : rewards) mean += r;
            mean /= static_cast<double>(rewards.size());
            double value = 0.0;
            for (size_t k = 0; k < group.trajectories.size(); ++k) {
                const double weight = (rewards[k] - mean) / static_cast<double>(rewards.size());
                for (size_t t = 0; t < group.trajectories[k].tokens.size(); ++t) {
                    const auto probs = p.probabilities(0, static_cast<int>(t));
                    value += weight *
                             std::log(probs[static_cast<size_t>(group.trajectories[k].tokens[t])]);
                }
            }
            return value;
        };
        grpo::ToyPolicy updated = policy;
        grpo::reinforce_step(updated, group, cfg);
        for (int t = 0; t < max_len; ++t) {
            for (int v = 0; v < vocab_size; ++v) {
                const double direction = updated.logits[0][t][v] - policy.logits[0][t][v];
                grpo::ToyPolicy plus = policy;
                plus.logits[0][t][v] += h;
                grpo::ToyPolicy minus = policy;
                minus.logits[0][t][v] -= h;
                const double fd = (surrogate(plus) - surrogate(minus)) / (2 * h);
                check.require(rel_error(direction, fd) <= 1e-4,
                              "alg1 gradient relative error above 1e-4");
            }
        }
    }
    check.require(seconds_since(start) < 30.0, "runtime exceeded 30 s");
    return check;
}

// ---------------------------------------------------------------------------
// 6. End-to-end learning check
// ---------------------------------------------------------------------------

Check criterion_learning() {
    Check check;
    const auto start = Clock::now();

    grpo::GRPOConfig cfg; // defaults: alg1, K=8, 500 steps, seed 1
    const grpo::TrainReport report =
        grpo::train_toy(grpo::MicroTask::builtin(), cfg, reward::CCVRConfig{});

    check.require(!report.steps.empty(), "no steps recorded");
    if (!report.steps.empty()) {
        check.require(report.steps.front().mean_reward <= 0.3,
                      "uniform-init mean reward above 0.3 (got " +
                          std::to_string(report.steps.front().mean_reward) + ")");
        double best = 0.0;
        for (const auto& step : report.steps) best = std::max(best, step.mean_reward);
        check.require(best >= 0.9, "mean reward never reached 0.9 (best " +
                                      std::to_string(best) + ")");
    }
    check.require(seconds_since(start) < 60.0, "runtime exceeded 60 s");
    return check;
}

// ---------------------------------------------------------------------------
// 7. Pipeline determinism
// ---------------------------------------------------------------------------

// Runs the CLI in-process with its progress output captured, keeping the
// acceptance report to one line per criterion.
int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"cotforge"};
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    return code;
}

Check criterion_pipeline_determinism() {
    Check check;
    const fs::path dir = fs::temp_directory_path() / "cotforge_acceptance_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream images(dir / "images.tsv");
        images << "imageA\tfile:///a.png\nimageB\nimageC\timgc.jpg\nimageD\n";
    }

    for (const std::string run : {"one", "two"}) {
        const fs::path out = dir / run;
        check.require(run_cli({"synthesize", "--images", (dir / "images.tsv").string(),
                               "--out-dir", out.string(), "--seed", "42"}) == 0,
                      "synthesize failed");
        check.require(run_cli({"build-tree", "--qa", (out / "qa.jsonl").string(), "--out",
                               (out / "tree.json").string(), "--seed", "42"}) == 0,
                      "build-tree failed");
        check.require(run_cli({"decompose", "--tree", (out / "tree.json").string(), "--out",
                               (out / "cot.jsonl").string()}) == 0,
                      "decompose failed");
    }
    if (check.ok) {
        for (const std::string file : {"triples.jsonl", "qa.jsonl", "tree.json", "cot.jsonl"}) {
            check.require(io::read_file(dir / "one" / file) == io::read_file(dir / "two" / file),
                          file + " differs between identical runs");
        }
    }
    return check;
}

// ---------------------------------------------------------------------------
// 8. Tree round trip
// ---------------------------------------------------------------------------

Check criterion_tree_round_trip() {
    Check check;
    const auto embedder = make_reference_embedder();
    SplitMix64 rng(20250808);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t n = 1 + rng.next_in(0, 31);
        std::vector<synthesis::AtomicQA> leaves;
        std::multiset<std::pair<std::string, bool>> expected;
        bool all_yes = true;
        for (size_t i = 0; i < n; ++i) {
            synthesis::AtomicQA qa;
            qa.question = "Is detail " + std::to_string(rng.next_in(0, 9)) + " visible?";
            qa.answer = rng.next_in(0, 3) == 0 ? Answer::no : Answer::yes;
            if (qa.answer == Answer::no) all_yes = false;
            expected.emplace(qa.question, qa.answer == Answer::yes);
            leaves.push_back(std::move(qa));
        }

        const treebuild::QuestionTree tree =
            treebuild::build_tree(leaves, {2, 4}, rng.next(), embedder);
        const auto records = treebuild::decompose(tree);

        if (n == 1) {
            check.require(records.empty(), "single leaf must decompose to no records");
            continue;
        }
        check.require(!records.empty(), "multi-leaf tree must yield records");
        if (records.empty()) continue;

        std::multiset<std::pair<std::string, bool>> got;
        for (const treebuild::CoTStep& step : records.front().steps) {
            if (step.question.find("; also, ") == std::string::npos) {
                got.emplace(step.question, step.answer == Answer::yes);
            }
        }
        check.require(got == expected, "root record leaf multiset differs from input");
        check.require((records.front().final_answer == Answer::yes) == all_yes,
                      "final answer must be the conjunction of leaf answers");
    }
    return check;
}

// ---------------------------------------------------------------------------
// 9. Reward truth tables
// ---------------------------------------------------------------------------

Check criterion_reward_truth_tables() {
    Check check;
    const auto embedder = make_reference_embedder();
    const reward::CCVRConfig cfg;
    const std::string chain = "the cat sits. the dog runs.";

    struct Shape {
        std::string name;
        std::function<std::string(const std::string&)> render; // answer text -> raw
        double format;
        bool answer_recoverable;
        bool think_recoverable;
    };
    const std::vector<Shape> shapes{
        {"well-formed",
         [&](const std::string& a) {
             return "<think>" + chain + "</think><answer>" + a + "</answer>";
         },
         1.0, true, true},
        {"missing think",
         [&](const std::string& a) { return "<answer>" + a + "</answer>"; }, 0.0, true, false},
        {"missing answer", [&](const std::string&) { return "<think>" + chain + "</think>"; },
         0.0, false, true},
        {"misordered",
         [&](const std::string& a) {
             return "<answer>" + a + "</answer><think>" + chain + "</think>";
         },
         0.0, true, true},
        {"duplicated think",
         [&](const std::string& a) {
             return "<think>" + chain + "</think><think>x.</think><answer>" + a + "</answer>";
         },
         0.0, true, true},
        {"duplicated answer",
         [&](const std::string& a) {
             return "<think>" + chain + "</think><answer>" + a + "</answer><answer>" + a +
                    "</answer>";
         },
         0.0, true, true},
        {"unclosed think",
         [&](const std::string& a) { return "<think>" + chain + "<answer>" + a + "</answer>"; },
         0.0, true, false},
        {"empty", [](const std::string&) { return std::string(); }, 0.0, false, false},
    };

    for (const Shape& shape : shapes) {
        for (Answer gold : {Answer::yes, Answer::no}) {
            for (const std::string answer_text : {"yes", "no", "yes and no"}) {
                const std::string raw = shape.render(answer_text);
                const reward::RewardBreakdown got =
                    reward::ccvr_reward(raw, gold, chain, cfg, embedder);

                check.require(got.format == shape.format,
                              shape.name + ": format reward mismatch");

                double expected_answer = 0.0;
                if (shape.answer_recoverable && answer_text != "yes and no" &&
                    answer_text == std::string(to_string(gold))) {
                    expected_answer = 1.0;
                }
                check.require(got.answer == expected_answer,
                              shape.name + ": answer reward mismatch (answer '" + answer_text +
                                  "' vs gold " + std::string(to_string(gold)) + ")");

                // The chain embedded in recoverable shapes equals the reference.
                const double expected_process = shape.think_recoverable ? 1.0 : 0.0;
                check.require(std::abs(got.process - expected_process) <= 1e-12,
                              shape.name + ": process reward mismatch");

                const double expected_total = cfg.lambda_format * shape.format +
                                              cfg.lambda_answer * expected_answer +
                                              cfg.lambda_process * expected_process;
                check.require(std::abs(got.total - expected_total) <= 1e-12,
                              shape.name + ": total differs from the hand-computed weighted sum");
            }
        }
    }
    return check;
}

// ---------------------------------------------------------------------------
// 10. Metrics oracle
// ---------------------------------------------------------------------------

Check criterion_metrics_oracle() {
    Check check;
    SplitMix64 rng(20250810);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t n = 1 + rng.next_in(0, 199);
        std::vector<bench::EvalItem> items;
        std::map<std::string, Answer> predictions;
        long tp = 0;
        long fp = 0;
        long fn = 0;
        long tn = 0;
        for (size_t i = 0; i < n; ++i) {
            bench::EvalItem item;
            item.id = "item" + std::to_string(i);
            item.gold = rng.next_in(0, 1) ? Answer::yes : Answer::no;
            item.split =
                rng.next_in(0, 1) ? bench::Split::in_domain : bench::Split::out_of_domain;
            item.difficulty = static_cast<int>(rng.next_in(0, 4));
            const Answer pred = rng.next_in(0, 1) ? Answer::yes : Answer::no;
            predictions[item.id] = pred;
            if (item.gold == Answer::yes) {
                (pred == Answer::yes ? tp : fn) += 1;
            } else {
                (pred == Answer::yes ? fp : tn) += 1;
            }
            items.push_back(std::move(item));
        }

        const bench::EvalReport report = bench::evaluate(predictions, items);
        check.require(report.total.counts.tp == tp && report.total.counts.fp == fp &&
                          report.total.counts.fn == fn && report.total.counts.tn == tn,
                      "confusion counts differ from the oracle");
        check.require(report.total.acc ==
                          static_cast<double>(tp + tn) / static_cast<double>(n),
                      "accuracy differs from exact confusion arithmetic");
        const double expected_f1 =
            (2 * tp + fp + fn) == 0
                ? 1.0
                : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
        check.require(std::abs(report.total.f1 - expected_f1) <= 1e-12,
                      "f1 differs from exact confusion arithmetic");

        bench::Confusion split_sum;
        for (const auto& [split, metrics] : report.per_split) {
            split_sum.tp += metrics.counts.tp;
            split_sum.fp += metrics.counts.fp;
            split_sum.fn += metrics.counts.fn;
            split_sum.tn += metrics.counts.tn;
        }
        bench::Confusion difficulty_sum;
        for (const auto& [level, metrics] : report.per_difficulty) {
            difficulty_sum.tp += metrics.counts.tp;
            difficulty_sum.fp += metrics.counts.fp;
            difficulty_sum.fn += metrics.counts.fn;
            difficulty_sum.tn += metrics.counts.tn;
        }
        for (const bench::Confusion& sum : {split_sum, difficulty_sum}) {
            check.require(sum.tp == tp && sum.fp == fp && sum.fn == fn && sum.tn == tn,
                          "per-slice confusion counts do not sum to the total");
        }
    }
    return check;
}

} // namespace

int main() {
    struct Criterion {
        int number;
        std::string name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "soft edit-distance DP matches the recursive oracle", criterion_soft_edit_oracle},
        {2, "semantic score is the literal pair count / max(m,n)", criterion_semantic_literal},
        {3, "group advantages normalize to mean 0 / std 1", criterion_advantages},
        {4, "KL estimator is nonnegative with exact closed forms", criterion_kl},
        {5, "analytic gradients match finite differences (eq5 + alg1)", criterion_gradients},
        {6, "toy training lifts mean reward from <=0.3 to >=0.9", criterion_learning},
        {7, "mock pipeline is byte-identical across reruns", criterion_pipeline_determinism},
        {8, "decompose(build_tree(Q)) round-trips the leaf multiset", criterion_tree_round_trip},
        {9, "reward truth tables match the contracts", criterion_reward_truth_tables},
        {10, "metrics match confusion-matrix arithmetic", criterion_metrics_oracle},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = Clock::now();
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = seconds_since(start);
        std::printf("%s criterion %2d: %s (%.2fs)%s%s\n", check.ok ? "PASS" : "FAIL",
                    criterion.number, criterion.name.c_str(), elapsed,
                    check.ok ? "" : " -- ", check.ok ? "" : check.detail.c_str());
        if (!check.ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
