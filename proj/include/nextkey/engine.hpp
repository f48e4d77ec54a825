#pragma once
// Keystroke-driven prediction engine.
//
// The day is split into `partitions` equal intervals, each with its own
// weighted trie. A word is learned in the partition that was active when its
// first character was typed. After every keystroke the engine returns the
// top-n characters that followed the current prefix, where n shrinks after
// `conf` consecutive hits and grows after `diff` consecutive bad-prediction
// feedbacks. Feedback puts the engine into an idle state: it keeps learning
// but predicts nothing until the next word separator.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "nextkey/message.hpp"
#include "nextkey/trie.hpp"
#include "nextkey/unicode.hpp"

namespace nextkey {

struct EngineConfig {
    std::size_t partitions = 1;
    std::size_t conf = 5;
    std::size_t diff = 2;
    std::size_t n_initial = 3;
    std::size_t n_min = 1;
    SeparatorSet separators;
    std::optional<std::size_t> word_budget;   // per partition; unset disables pruning
    std::optional<std::size_t> alphabet_cap;  // informational only
    // Offset added to UTC timestamps before computing the time of day.
    std::int64_t utc_offset = 0;

    /// Throws std::invalid_argument when a bound is violated.
    void validate() const;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// Thrown when keystroke timestamps go backwards.
class StreamOrderError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Index of the day partition containing `now`.
std::size_t partition_of(Timestamp now, std::size_t partitions, std::int64_t utc_offset = 0);

class Engine {
public:
    explicit Engine(EngineConfig config = {});

    /// Learns `ch` and returns the prediction for the next keystroke.
    const PredictionSet& handle_keystroke(char32_t ch, Timestamp now, bool feedback = false);

    /// Bad-prediction feedback applied to the pending event: equivalent to
    /// passing feedback=true with the next keystroke.
    void send_feedback();

    /// Replays past messages as training. Counters that react to prediction
    /// outcomes are frozen while replaying. Messages must be sorted by ts.
    void accelerate(std::span<const Message> messages);

    /// Completes any word in progress, as a separator would, and returns the
    /// cursor to the root without counting a keystroke event.
    const PredictionSet& commit_word(Timestamp now);

    /// Adds `word` once to every partition trie.
    void preload(std::u32string_view word, Timestamp now);

    /// Clears per-session state: n back to n_initial, streaks, idle flag,
    /// last prediction and the timestamp watermark.
    void begin_session();

    const EngineConfig& config() const noexcept { return config_; }
    const PredictionSet& last_prediction() const noexcept { return last_prediction_; }
    bool idle() const noexcept { return idle_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t success_streak() const noexcept { return success_streak_; }
    std::size_t feedback_streak() const noexcept { return feedback_streak_; }
    std::size_t active_partition() const noexcept { return active_; }
    Cursor cursor() const noexcept { return cursor_; }
    std::uint64_t event_index() const noexcept { return event_index_; }

    std::span<const WeightedTrie> tries() const noexcept { return tries_; }
    const WeightedTrie& trie(std::size_t partition) const { return tries_.at(partition); }
    std::size_t word_count() const noexcept;
    std::size_t node_count() const noexcept;

    /// Distinct non-separator characters ever learned. Bounds the growth of n.
    const std::set<char32_t>& alphabet() const noexcept { return alphabet_; }

    // Node visits recorded by all tries since the last reset.
    std::uint64_t visits() const noexcept;
    void reset_visits() noexcept;

    /// Builds an engine from persisted tries. Session state starts fresh.
    static Engine restore(EngineConfig config, std::vector<WeightedTrie> tries,
                          std::set<char32_t> alphabet);

private:
    void account_outcome(char32_t ch, bool feedback);
    void finish_word(Timestamp now);
    void check_order(Timestamp now);

    EngineConfig config_;
    std::vector<WeightedTrie> tries_;
    std::set<char32_t> alphabet_;
    std::size_t active_ = 0;
    Cursor cursor_;
    bool idle_ = false;
    bool training_ = false;
    std::size_t n_ = 0;
    std::size_t success_streak_ = 0;
    std::size_t feedback_streak_ = 0;
    PredictionSet last_prediction_;
    std::uint64_t event_index_ = 0;
    std::optional<Timestamp> watermark_;
};

}  // namespace nextkey
