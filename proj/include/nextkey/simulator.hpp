#pragma once
// Offline evaluation harness.
//
// For every variant and every training-set size on the grid, a fresh engine
// is trained on the first `train_size` messages and then scored while it
// "types" the following `test_size` messages keystroke by keystroke.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nextkey/engine.hpp"
#include "nextkey/message.hpp"

namespace nextkey {

struct Variant {
    std::string name;
    EngineConfig config;
    std::vector<std::string> preload;  // dictionary words, UTF-8
    bool feedback_on_miss = true;
};

struct SimulationPlan {
    std::size_t train_max = 1500;
    std::size_t train_step = 50;
    std::size_t test_size = 500;
    std::vector<Variant> variants;
    std::size_t jobs = 1;

    void validate() const;
};

struct SimulationRow {
    std::string variant;
    std::size_t train_size = 0;
    double mean_precision = 0.0;
    std::size_t words_learned = 0;
    std::size_t prediction_events = 0;
    std::size_t empty_prediction_events = 0;
};

struct SimulationReport {
    std::vector<SimulationRow> rows;  // variant-major, train_size ascending
    std::vector<std::string> warnings;
};

/// Hit ratio of one prediction: 1/|G| on a hit, 0 otherwise.
double precision_score(const PredictionSet& prediction, char32_t actual);

struct ScoredEvent {
    PredictionSet prediction;
    char32_t actual = 0;
};

/// Types `message` into `engine`, recording the prediction each non-separator
/// character was typed against. With `feedback_on_miss`, a non-empty
/// prediction that misses triggers bad-prediction feedback.
std::vector<ScoredEvent> replay_message(Engine& engine, const Message& message,
                                        bool feedback_on_miss = true);

/// Builds an engine for `variant`, preloads its dictionary at time 0 and
/// accelerates it on `training`.
Engine train_engine(const Variant& variant, std::span<const Message> training);

SimulationReport run_simulation(const std::vector<Message>& messages, const SimulationPlan& plan);

void write_report_csv(std::ostream& out, const SimulationReport& report);
std::string report_csv(const SimulationReport& report);

}  // namespace nextkey
