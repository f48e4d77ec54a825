#include "nextkey/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace nextkey {

void SimulationPlan::validate() const {
    if (train_step < 1) {
        throw std::invalid_argument("train_step must be at least 1");
    }
    if (test_size < 1) {
        throw std::invalid_argument("test_size must be at least 1");
    }
    if (variants.empty()) {
        throw std::invalid_argument("a simulation needs at least one variant");
    }
    for (const Variant& v : variants) {
        if (v.name.find_first_of(",\r\n\"") != std::string::npos) {
            throw std::invalid_argument("variant name must not contain commas, quotes or newlines");
        }
        v.config.validate();
    }
}

double precision_score(const PredictionSet& prediction, char32_t actual) {
    if (prediction.empty() || !prediction.contains(actual)) {
        return 0.0;
    }
    return 1.0 / static_cast<double>(prediction.size());
}

std::vector<ScoredEvent> replay_message(Engine& engine, const Message& message,
                                        bool feedback_on_miss) {
    const SeparatorSet& separators = engine.config().separators;
    std::u32string keys = decode_utf8(message.text);
    std::vector<ScoredEvent> events;
    events.reserve(keys.size());

    const auto type = [&](char32_t ch) {
        const PredictionSet before = engine.last_prediction();
        const bool separator = separators.contains(ch);
        const bool feedback =
            feedback_on_miss && !separator && !before.empty() && !before.contains(ch);
        engine.handle_keystroke(ch, message.ts, feedback);
        if (!separator) {
            events.push_back({before, ch});
        }
    };
    for (char32_t ch : keys) {
        type(ch);
    }
    type(separators.primary());
    return events;
}

Engine train_engine(const Variant& variant, std::span<const Message> training) {
    Engine engine(variant.config);
    for (const std::string& word : variant.preload) {
        engine.preload(decode_utf8(word), 0);
    }
    engine.accelerate(training);
    return engine;
}

namespace {

SimulationRow evaluate_row(const Variant& variant, const std::vector<Message>& messages,
                           std::size_t train_size, std::size_t test_size) {
    const std::span<const Message> all(messages);
    Engine engine = train_engine(variant, all.first(train_size));

    SimulationRow row;
    row.variant = variant.name;
    row.train_size = train_size;
    row.words_learned = engine.word_count();

    double score_sum = 0.0;
    for (const Message& m : all.subspan(train_size, test_size)) {
        for (const ScoredEvent& e : replay_message(engine, m, variant.feedback_on_miss)) {
            ++row.prediction_events;
            if (e.prediction.empty()) {
                ++row.empty_prediction_events;
            }
            score_sum += precision_score(e.prediction, e.actual);
        }
    }
    if (row.prediction_events > 0) {
        row.mean_precision = score_sum / static_cast<double>(row.prediction_events);
    }
    return row;
}

}  // namespace

SimulationReport run_simulation(const std::vector<Message>& messages, const SimulationPlan& plan) {
    plan.validate();
    if (messages.empty()) {
        throw std::invalid_argument("cannot simulate on an empty message list");
    }

    SimulationReport report;
    std::size_t train_max = plan.train_max;
    std::size_t test_size = plan.test_size;
    if (train_max + test_size > messages.size()) {
        if (messages.size() > test_size) {
            train_max = std::min(train_max, (messages.size() - test_size) / plan.train_step *
                                                plan.train_step);
        } else {
            train_max = 0;
            test_size = messages.size();
        }
        std::ostringstream w;
        w << "corpus has " << messages.size() << " messages; plan truncated to train_max="
          << train_max << " test_size=" << test_size;
        report.warnings.push_back(w.str());
    }

    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s <= train_max; s += plan.train_step) {
        sizes.push_back(s);
    }

    struct Task {
        const Variant* variant;
        std::size_t train_size;
    };
    std::vector<Task> tasks;
    for (const Variant& v : plan.variants) {
        for (std::size_t s : sizes) {
            tasks.push_back({&v, s});
        }
    }
    report.rows.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                report.rows[i] = evaluate_row(*tasks[i].variant, messages, tasks[i].train_size,
                                              test_size);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = tasks.size();
            }
        }
    };

    const std::size_t jobs = std::clamp<std::size_t>(plan.jobs, 1, tasks.size());
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return report;
}

void write_report_csv(std::ostream& out, const SimulationReport& report) {
    out << "variant,train_size,mean_precision,words_learned,prediction_events,"
           "empty_prediction_events\n";
    for (const SimulationRow& r : report.rows) {
        out << r.variant << ',' << r.train_size << ',' << std::fixed << std::setprecision(6)
            << r.mean_precision << ',' << r.words_learned << ',' << r.prediction_events << ','
            << r.empty_prediction_events << '\n';
    }
}

std::string report_csv(const SimulationReport& report) {
    std::ostringstream out;
    write_report_csv(out, report);
    return out.str();
}

}  // namespace nextkey
