// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check is seeded and deterministic except the latency one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nextkey/engine.hpp"
#include "nextkey/simulator.hpp"
#include "nextkey/snapshot.hpp"
#include "support/oracle.hpp"
#include "support/synthetic.hpp"

using namespace nextkey;
namespace t = nextkey::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

std::size_t jobs() {
    return std::max(1u, std::thread::hardware_concurrency());
}

Variant variant(std::string name, std::size_t partitions,
                std::optional<std::size_t> budget = std::nullopt) {
    Variant v;
    v.name = std::move(name);
    v.config.partitions = partitions;
    v.config.word_budget = budget;
    return v;
}

// The evaluation grid: training sets of 0..1500 messages in steps of 50,
// each tested on the following 500.
SimulationPlan grid(std::vector<Variant> variants) {
    SimulationPlan plan;
    plan.train_max = 1500;
    plan.train_step = 50;
    plan.test_size = 500;
    plan.variants = std::move(variants);
    plan.jobs = jobs();
    return plan;
}

std::vector<SimulationRow> rows_of(const SimulationReport& report, const std::string& name) {
    std::vector<SimulationRow> out;
    std::copy_if(report.rows.begin(), report.rows.end(), std::back_inserter(out),
                 [&](const SimulationRow& r) { return r.variant == name; });
    return out;
}

double grid_mean(const std::vector<SimulationRow>& rows) {
    double sum = 0;
    for (const SimulationRow& r : rows) {
        sum += r.mean_precision;
    }
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
}

char32_t random_key(std::mt19937_64& rng, std::size_t letters, double space_rate) {
    if (std::bernoulli_distribution(space_rate)(rng)) {
        return U' ';
    }
    return U'a' + static_cast<char32_t>(rng() % letters);
}

bool same_ranking(const t::Ranked& a, const t::Ranked& b, double tolerance) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first || std::abs(a[i].second - b[i].second) > tolerance) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    std::size_t compared = 0;
    for (int stream = 0; stream < 100; ++stream) {
        Engine engine;
        t::ReferenceModel<t::FlatWordList> oracle({});
        const std::size_t length = 1 + rng() % 5000;
        for (std::size_t i = 0; i < length; ++i) {
            // Nine letters plus the space separator.
            const char32_t ch = random_key(rng, 9, 0.2);
            const bool feedback = rng() % 29 == 0;
            const t::Ranked expected = oracle.type(ch, feedback);
            const t::Ranked actual =
                t::as_ranked(engine.handle_keystroke(ch, static_cast<Timestamp>(i), feedback));
            if (!same_ranking(actual, expected, 1e-12) || engine.n() != oracle.n()) {
                return {false, "stream " + std::to_string(stream) + " diverged at keystroke " +
                                   std::to_string(i)};
            }
            ++compared;
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {seconds < 10.0, std::to_string(compared) + " predictions identical; " +
                                fmt(seconds, 2) + " s (limit 10 s)"};
}

Outcome single_partition_equivalence() {
    std::mt19937_64 rng(2002);
    std::size_t compared = 0;
    for (int stream = 0; stream < 50; ++stream) {
        Engine engine;
        t::ReferenceModel<t::BareTrie> bare({});
        Timestamp now = t::kEpoch + static_cast<Timestamp>(rng() % t::kDay);
        const std::size_t length = 1000 + rng() % 4000;
        for (std::size_t i = 0; i < length; ++i) {
            now += static_cast<Timestamp>(rng() % 3600);
            const char32_t ch = random_key(rng, 12, 0.18);
            const bool feedback = rng() % 31 == 0;
            const t::Ranked expected = bare.type(ch, feedback);
            const t::Ranked actual = t::as_ranked(engine.handle_keystroke(ch, now, feedback));
            if (actual != expected || engine.n() != bare.n()) {
                return {false, "stream " + std::to_string(stream) + " diverged at keystroke " +
                                   std::to_string(i)};
            }
            ++compared;
        }
    }
    return {true, "50 streams, " + std::to_string(compared) + " predictions identical"};
}

Outcome time_awareness_gain() {
    const auto day_night = t::day_night_corpus(3003, 2000, 200);
    const auto report =
        run_simulation(day_night, grid({variant("T=1", 1), variant("T=2", 2)}));
    const double p1 = grid_mean(rows_of(report, "T=1"));
    const double p2 = grid_mean(rows_of(report, "T=2"));
    const double gain = p2 / p1 - 1.0;
    Outcome out{gain >= 0.10, "day/night: T=1 " + fmt(p1) + ", T=2 " + fmt(p2) + ", gain " +
                                  fmt(100 * gain, 1) + "% (need >= 10%)"};

    const auto hourly = t::hourly_corpus(3004, 2000, 40, 60);
    const std::vector<std::size_t> partitions{1, 2, 4, 8, 24};
    std::vector<Variant> variants;
    for (std::size_t p : partitions) {
        variants.push_back(variant("T=" + std::to_string(p), p));
    }
    const auto hourly_report = run_simulation(hourly, grid(variants));
    out.detail += "; hourly:";
    double previous = -1.0;
    for (std::size_t p : partitions) {
        const double m = grid_mean(rows_of(hourly_report, "T=" + std::to_string(p)));
        out.detail += " T=" + std::to_string(p) + " " + fmt(m);
        if (previous >= 0 && m < previous - 0.01) {
            out.pass = false;
            out.detail += " (drop > 0.01)";
        }
        previous = m;
    }
    return out;
}

Outcome pruning_tradeoff() {
    constexpr std::size_t kBudget = 300;
    const auto messages = t::drifting_corpus(4004, 2000, 500, 250);

    // The budget holds after every message of a full replay.
    EngineConfig config;
    config.word_budget = kBudget;
    Engine engine(config);
    std::size_t peak = 0;
    for (const Message& m : messages) {
        replay_message(engine, m);
        peak = std::max(peak, engine.word_count());
    }

    const auto report = run_simulation(
        messages, grid({variant("unpruned", 1), variant("pruned", 1, kBudget)}));
    std::size_t peak_learned = 0;
    for (const SimulationRow& r : rows_of(report, "pruned")) {
        peak_learned = std::max(peak_learned, r.words_learned);
    }
    const double base = grid_mean(rows_of(report, "unpruned"));
    const double pruned = grid_mean(rows_of(report, "pruned"));
    const double change = pruned / base - 1.0;
    const bool pass = peak <= kBudget && peak_learned <= kBudget && std::abs(change) <= 0.15;
    return {pass, "peak words " + std::to_string(std::max(peak, peak_learned)) + " (budget " +
                      std::to_string(kBudget) + "); precision unpruned " + fmt(base) +
                      ", pruned " + fmt(pruned) + ", change " + fmt(100 * change, 1) +
                      "% (limit 15%)"};
}

Outcome dictionary_trend() {
    std::mt19937_64 rng(5005);
    std::set<std::string> used;
    const auto user_vocab = t::make_vocabulary(rng, 300, used);
    auto dictionary = t::make_vocabulary(rng, 4850, used);
    // Half the user's words are in the dictionary, half are idiosyncratic.
    dictionary.insert(dictionary.end(), user_vocab.begin(), user_vocab.begin() + 150);
    std::shuffle(dictionary.begin(), dictionary.end(), rng);

    std::vector<std::string> shuffled = user_vocab;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    t::ZipfSampler zipf(shuffled.size());
    std::vector<Message> messages;
    for (Timestamp ts : t::timeline(rng, 2000, 20, t::uniform_second)) {
        messages.push_back({ts, t::sentence(rng, shuffled, zipf)});
    }

    Variant preloaded = variant("dictionary", 1);
    preloaded.preload = dictionary;
    const auto report = run_simulation(messages, grid({variant("adaptive", 1), preloaded}));
    const auto adaptive = rows_of(report, "adaptive");
    const auto dict = rows_of(report, "dictionary");
    bool pass = true;
    double worst_margin = 1.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < adaptive.size(); ++i) {
        if (adaptive[i].train_size < 300) {
            continue;
        }
        ++checked;
        const double margin = adaptive[i].mean_precision - dict[i].mean_precision;
        worst_margin = std::min(worst_margin, margin);
        pass = pass && margin > 0;
    }
    return {pass && checked > 0,
            std::to_string(checked) + " train sizes >= 300; adaptive mean " +
                fmt(grid_mean(adaptive)) + ", dictionary mean " + fmt(grid_mean(dict)) +
                ", smallest lead " + fmt(worst_margin)};
}

// Types real words of a preloaded vocabulary and times each keystroke.
class LatencyProbe {
public:
    LatencyProbe(std::size_t target_nodes, std::uint64_t seed) : rng_(seed) {
        while (engine_.node_count() < target_nodes) {
            std::u32string w;
            for (std::size_t k = 0, len = 4 + rng_() % 9; k < len; ++k) {
                w.push_back(U'a' + static_cast<char32_t>(rng_() % 26));
            }
            engine_.preload(w, 0);
            words_.push_back(std::move(w));
        }
        word_ = rng_() % words_.size();
    }

    std::size_t nodes() const { return engine_.node_count(); }
    std::uint64_t max_visits() const { return max_visits_; }

    /// Median latency of `samples` keystrokes after a warm-up.
    double round(std::size_t samples) {
        for (std::size_t i = 0; i < 20000; ++i) {
            engine_.handle_keystroke(next_key(), 1);
        }
        std::vector<double> ns;
        ns.reserve(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const char32_t ch = next_key();
            engine_.reset_visits();
            const auto begin = std::chrono::steady_clock::now();
            engine_.handle_keystroke(ch, 1);
            const auto end = std::chrono::steady_clock::now();
            ns.push_back(std::chrono::duration<double, std::nano>(end - begin).count());
            max_visits_ = std::max(max_visits_, engine_.visits());
        }
        std::nth_element(ns.begin(), ns.begin() + static_cast<std::ptrdiff_t>(samples / 2),
                         ns.end());
        return ns[samples / 2];
    }

private:
    char32_t next_key() {
        if (pos_ == words_[word_].size()) {
            word_ = rng_() % words_.size();
            pos_ = 0;
            return U' ';
        }
        return words_[word_][pos_++];
    }

    std::mt19937_64 rng_;
    Engine engine_;
    std::vector<std::u32string> words_;
    std::size_t word_ = 0;
    std::size_t pos_ = 0;
    std::uint64_t max_visits_ = 0;
};

double median_of(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

Outcome constant_time() {
    LatencyProbe small(1000, 6006);
    LatencyProbe large(1000000, 6007);
    // Rounds alternate between the two sizes so that background load on
    // the host affects both alike.
    std::vector<double> small_rounds;
    std::vector<double> large_rounds;
    for (int r = 0; r < 5; ++r) {
        small_rounds.push_back(small.round(100000));
        large_rounds.push_back(large.round(100000));
    }
    const double small_ns = median_of(small_rounds);
    const double large_ns = median_of(large_rounds);
    const double ratio = large_ns / small_ns;
    const bool pass = ratio < 2.0 && small.max_visits() <= 2 && large.max_visits() <= 2;
    return {pass, "median " + fmt(small_ns, 0) + " ns at " + std::to_string(small.nodes()) +
                      " nodes, " + fmt(large_ns, 0) + " ns at " + std::to_string(large.nodes()) +
                      " nodes, ratio " + fmt(ratio, 2) + " (limit 2); max visits " +
                      std::to_string(small.max_visits()) + "/" +
                      std::to_string(large.max_visits()) + " (limit 2)"};
}

// Engine whose trie holds one chain "abcdefghijklmnopqrst": every letter
// typed along it is a hit against a singleton prediction.
Engine chain(std::size_t conf = 5, std::size_t diff = 2, std::size_t n_initial = 3,
             std::size_t n_min = 1) {
    EngineConfig c;
    c.conf = conf;
    c.diff = diff;
    c.n_initial = n_initial;
    c.n_min = n_min;
    Engine e(c);
    e.accelerate(std::vector<Message>{{0, "abcdefghijklmnopqrst"}});
    return e;
}

void type(Engine& e, std::u32string_view keys, std::u32string_view feedback_mask = {}) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const bool fb = i < feedback_mask.size() && feedback_mask[i] == U'!';
        e.handle_keystroke(keys[i], 1, fb);
    }
}

Outcome confidence_mechanics() {
    struct Case {
        const char* name;
        std::function<bool()> run;
    };
    const std::vector<Case> cases{
        {"conf hits shrink n by one", [] {
             Engine e = chain();
             type(e, U"abcde");
             return e.n() == 2 && e.success_streak() == 0;
         }},
        {"2*conf hits shrink n by two", [] {
             Engine e = chain();
             type(e, U"abcdefghij");
             return e.n() == 1;
         }},
        {"n clamps at n_min", [] {
             Engine e = chain(5, 2, 3, 2);
             type(e, U"abcdefghijklmnopqrst");
             return e.n() == 2;
         }},
        {"a miss resets the hit streak", [] {
             Engine e = chain();
             type(e, U"abcdz a");
             type(e, U"bcd");
             return e.n() == 3 && e.success_streak() == 4;
         }},
        {"separators neither count nor reset hits", [] {
             Engine e = chain(3);
             type(e, U"ab a");
             return e.n() == 2;
         }},
        {"diff-1 feedbacks keep n", [] {
             Engine e = chain(5, 3);
             type(e, U"xy", U"!!");
             return e.n() == 3 && e.feedback_streak() == 2;
         }},
        {"diff feedbacks grow n by one", [] {
             Engine e = chain();
             type(e, U"xy", U"!!");
             return e.n() == 4 && e.feedback_streak() == 0;
         }},
        {"2*diff feedbacks grow n by two", [] {
             Engine e = chain();
             type(e, U"wxyz", U"!!!!");
             return e.n() == 5;
         }},
        {"a hit resets the feedback streak", [] {
             Engine e = chain();
             type(e, U"x a", U"!");
             type(e, U"y", U"!");
             return e.n() == 3 && e.feedback_streak() == 1;
         }},
        {"feedback resets the hit streak", [] {
             Engine e = chain();
             type(e, U"abcd");
             type(e, U"e", U"!");
             type(e, U" abcd");
             return e.n() == 3 && e.success_streak() == 4;
         }},
        {"n never exceeds the learned alphabet", [] {
             EngineConfig c;
             Engine e(c);
             e.accelerate(std::vector<Message>{{0, "ab ba"}});
             type(e, U"aaaaaaaaaa", U"!!!!!!!!!!");
             return e.n() == 3;
         }},
        {"send_feedback matches the keystroke flag", [] {
             Engine a = chain();
             Engine b = chain();
             type(a, U"abqr ", U"  !! ");
             type(b, U"ab");
             b.send_feedback();
             b.handle_keystroke(U'q', 1);
             b.send_feedback();
             type(b, U"r");
             b.handle_keystroke(U' ', 1);
             return a.n() == b.n() && a.idle() == b.idle() &&
                    a.last_prediction() == b.last_prediction();
         }},
    };
    std::size_t passed = 0;
    std::string failed;
    for (const Case& c : cases) {
        if (c.run()) {
            ++passed;
        } else {
            failed += std::string(failed.empty() ? "; failed: " : ", ") + c.name;
        }
    }
    return {passed == cases.size(),
            std::to_string(passed) + "/" + std::to_string(cases.size()) + " scripted cases" +
                failed};
}

Outcome determinism_and_persistence() {
    const auto messages = t::hourly_corpus(7007, 700, 30, 40);
    SimulationPlan plan;
    plan.train_max = 500;
    plan.train_step = 50;
    plan.test_size = 200;
    plan.variants = {variant("T=1", 1), variant("T=24", 24), variant("T=4+prune", 4, 80)};
    plan.jobs = 1;
    const std::string serial = report_csv(run_simulation(messages, plan));
    const std::string again = report_csv(run_simulation(messages, plan));
    plan.jobs = jobs();
    const std::string parallel = report_csv(run_simulation(messages, plan));
    const bool reports_equal = serial == again && serial == parallel;

    const auto dir = std::filesystem::temp_directory_path() / "nextkey_acceptance";
    std::filesystem::create_directories(dir);
    const auto path = dir / "state.json";
    std::mt19937_64 rng(7008);
    std::size_t streams_ok = 0;
    std::string first_failure;
    for (int stream = 0; stream < 1000; ++stream) {
        EngineConfig c;
        c.partitions = 1 + rng() % 6;
        if (rng() % 3 == 0) {
            c.word_budget = 3 + rng() % 40;
        }
        Engine live(c);
        Timestamp now = t::kEpoch;
        const auto step = [&] {
            now += static_cast<Timestamp>(rng() % 5000);
            return random_key(rng, 8, 0.2);
        };
        for (std::size_t i = 0, n = 100 + rng() % 900; i < n; ++i) {
            live.handle_keystroke(step(), now, rng() % 19 == 0);
        }
        live.commit_word(now);
        save_snapshot(path, live);
        Engine loaded = load_snapshot(path);
        live.begin_session();
        bool same = true;
        for (std::size_t i = 0, n = 100 + rng() % 900; i < n && same; ++i) {
            const char32_t ch = step();
            const bool fb = rng() % 19 == 0;
            same = live.handle_keystroke(ch, now, fb) == loaded.handle_keystroke(ch, now, fb) &&
                   live.n() == loaded.n();
        }
        if (same) {
            ++streams_ok;
        } else if (first_failure.empty()) {
            first_failure = "; first divergence in stream " + std::to_string(stream);
        }
    }
    std::filesystem::remove_all(dir);
    return {reports_equal && streams_ok == 1000,
            std::string(reports_equal ? "reruns byte-identical (1 and " + std::to_string(jobs()) +
                                            " threads)"
                                      : "reruns differ") +
                "; " + std::to_string(streams_ok) + "/1000 continuation streams identical" +
                first_failure};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle-equivalence", oracle_equivalence},
        {"single-partition-equivalence", single_partition_equivalence},
        {"time-awareness-gain", time_awareness_gain},
        {"pruning-tradeoff", pruning_tradeoff},
        {"dictionary-vs-adaptive", dictionary_trend},
        {"constant-time-prediction", constant_time},
        {"confidence-mechanics", confidence_mechanics},
        {"determinism-and-persistence", determinism_and_persistence},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
