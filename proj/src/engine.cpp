#include "nextkey/engine.hpp"

#include <algorithm>
#include <string>

namespace nextkey {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

}  // namespace

void EngineConfig::validate() const {
    if (partitions < 1) {
        throw std::invalid_argument("partitions must be at least 1");
    }
    if (partitions > static_cast<std::size_t>(kSecondsPerDay)) {
        throw std::invalid_argument("partitions must not exceed the seconds in a day");
    }
    if (conf < 1) {
        throw std::invalid_argument("conf must be at least 1");
    }
    if (diff < 1) {
        throw std::invalid_argument("diff must be at least 1");
    }
    if (n_min < 1) {
        throw std::invalid_argument("n_min must be at least 1");
    }
    if (n_initial < n_min) {
        throw std::invalid_argument("n_initial must be at least n_min");
    }
    if (word_budget && *word_budget < 1) {
        throw std::invalid_argument("word budget must be at least 1");
    }
    if (alphabet_cap && *alphabet_cap < 1) {
        throw std::invalid_argument("alphabet cap must be at least 1");
    }
}

std::size_t partition_of(Timestamp now, std::size_t partitions, std::int64_t utc_offset) {
    if (partitions < 1) {
        throw std::invalid_argument("partitions must be at least 1");
    }
    std::int64_t seconds = (now + utc_offset) % kSecondsPerDay;
    if (seconds < 0) {
        seconds += kSecondsPerDay;
    }
    // floor(seconds / (86400 / T)) == floor(seconds * T / 86400)
    const auto index = static_cast<std::size_t>(seconds) * partitions / kSecondsPerDay;
    return std::min(index, partitions - 1);
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
    config_.validate();
    tries_.resize(config_.partitions);
    n_ = config_.n_initial;
}

Engine Engine::restore(EngineConfig config, std::vector<WeightedTrie> tries,
                       std::set<char32_t> alphabet) {
    Engine engine(std::move(config));
    if (tries.size() != engine.config_.partitions) {
        throw std::invalid_argument("expected " + std::to_string(engine.config_.partitions) +
                                    " partition tries, got " + std::to_string(tries.size()));
    }
    engine.tries_ = std::move(tries);
    engine.alphabet_ = std::move(alphabet);
    return engine;
}

void Engine::begin_session() {
    cursor_ = tries_[active_].root();
    idle_ = false;
    n_ = config_.n_initial;
    success_streak_ = 0;
    feedback_streak_ = 0;
    last_prediction_ = {};
    watermark_.reset();
}

void Engine::check_order(Timestamp now) {
    if (watermark_ && now < *watermark_) {
        throw StreamOrderError("timestamp " + std::to_string(now) + " precedes " +
                               std::to_string(*watermark_));
    }
    watermark_ = now;
}

void Engine::account_outcome(char32_t ch, bool feedback) {
    if (training_) {
        return;
    }
    if (feedback) {
        idle_ = true;
        success_streak_ = 0;
        if (++feedback_streak_ == config_.diff) {
            // n never exceeds the number of keys that could be predicted.
            if (n_ < alphabet_.size()) {
                ++n_;
            }
            feedback_streak_ = 0;
        }
        return;
    }
    // Separators are never predicted, so they are neither hits nor misses.
    if (config_.separators.contains(ch)) {
        return;
    }
    if (last_prediction_.contains(ch)) {
        feedback_streak_ = 0;
        if (++success_streak_ == config_.conf) {
            n_ = std::max(config_.n_min, n_ - 1);
            success_streak_ = 0;
        }
    } else {
        success_streak_ = 0;
    }
}

void Engine::finish_word(Timestamp now) {
    WeightedTrie& trie = tries_[active_];
    cursor_ = trie.end_word(cursor_, now);
    if (config_.word_budget) {
        trie.prune_to_budget(*config_.word_budget);
    }
    idle_ = false;
    last_prediction_ = trie.predict_at(cursor_, n_);
}

const PredictionSet& Engine::handle_keystroke(char32_t ch, Timestamp now, bool feedback) {
    check_order(now);
    ++event_index_;
    account_outcome(ch, feedback);

    // The partition is latched when a word starts so the cursor stays valid
    // for the whole word.
    if (cursor_.at_root()) {
        active_ = partition_of(now, config_.partitions, config_.utc_offset);
        cursor_ = tries_[active_].root();
    }

    if (config_.separators.contains(ch)) {
        finish_word(now);
        return last_prediction_;
    }

    WeightedTrie& trie = tries_[active_];
    cursor_ = trie.descend_or_create(cursor_, ch);
    alphabet_.insert(ch);

    if (idle_) {
        last_prediction_ = {};
        last_prediction_.bound = n_;
    } else {
        last_prediction_ = trie.predict_at(cursor_, n_);
    }
    return last_prediction_;
}

void Engine::send_feedback() {
    account_outcome(0, true);
    last_prediction_ = {};
    last_prediction_.bound = n_;
}

const PredictionSet& Engine::commit_word(Timestamp now) {
    check_order(now);
    finish_word(now);
    return last_prediction_;
}

void Engine::accelerate(std::span<const Message> messages) {
    if (!std::is_sorted(messages.begin(), messages.end(),
                        [](const Message& a, const Message& b) { return a.ts < b.ts; })) {
        throw std::invalid_argument("accelerator messages must be sorted by timestamp");
    }
    if (!messages.empty() && watermark_ && messages.front().ts < *watermark_) {
        throw StreamOrderError("accelerator messages precede the engine clock");
    }
    std::vector<std::u32string> texts;
    texts.reserve(messages.size());
    for (const Message& m : messages) {
        texts.push_back(decode_utf8(m.text));
    }

    training_ = true;
    try {
        const char32_t terminator = config_.separators.primary();
        for (std::size_t i = 0; i < messages.size(); ++i) {
            for (char32_t ch : texts[i]) {
                handle_keystroke(ch, messages[i].ts, false);
            }
            handle_keystroke(terminator, messages[i].ts, false);
        }
    } catch (...) {
        training_ = false;
        throw;
    }
    training_ = false;
}

void Engine::preload(std::u32string_view word, Timestamp now) {
    for (WeightedTrie& trie : tries_) {
        trie.preload_word(word, now, config_.separators);
    }
    alphabet_.insert(word.begin(), word.end());
}

std::size_t Engine::word_count() const noexcept {
    std::size_t total = 0;
    for (const WeightedTrie& t : tries_) {
        total += t.word_count();
    }
    return total;
}

std::size_t Engine::node_count() const noexcept {
    std::size_t total = 0;
    for (const WeightedTrie& t : tries_) {
        total += t.node_count();
    }
    return total;
}

std::uint64_t Engine::visits() const noexcept {
    std::uint64_t total = 0;
    for (const WeightedTrie& t : tries_) {
        total += t.visits();
    }
    return total;
}

void Engine::reset_visits() noexcept {
    for (WeightedTrie& t : tries_) {
        t.reset_visits();
    }
}

}  // namespace nextkey
