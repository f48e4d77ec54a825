#pragma once
// Weighted trie over Unicode scalars.
//
// Every node counts how many times a cursor descended through it. Nodes where
// a word was completed carry a WordEnd marker holding the completion count and
// the recency used for LRU forgetting. After all words are terminated, each
// node satisfies weight == own completion count + sum of children weights.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "nextkey/unicode.hpp"

namespace nextkey {

struct Prediction {
    char32_t ch = 0;
    double p = 0.0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Ranked next-character candidates: probability descending, code point
/// ascending on ties, at most `bound` entries.
struct PredictionSet {
    std::vector<Prediction> entries;
    std::size_t bound = 0;

    bool empty() const noexcept { return entries.empty(); }
    std::size_t size() const noexcept { return entries.size(); }
    bool contains(char32_t ch) const noexcept;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct WordEnd {
    std::uint64_t count = 0;
    Timestamp last_used = 0;
    // Tie-breaker among equal last_used values; larger is more recent.
    std::uint64_t seq = 0;
};

/// Position in a trie. The root is the word boundary.
class Cursor {
public:
    using NodeId = std::uint32_t;

    constexpr Cursor() = default;
    constexpr explicit Cursor(NodeId id) : id_(id) {}

    constexpr NodeId id() const noexcept { return id_; }
    constexpr bool at_root() const noexcept { return id_ == 0; }

    friend constexpr auto operator<=>(Cursor, Cursor) = default;

private:
    NodeId id_ = 0;
};

struct RemovedWord {
    std::u32string word;
    std::uint64_t count = 0;
    Timestamp last_used = 0;
};

class WeightedTrie {
public:
    WeightedTrie();

    Cursor root() const noexcept { return Cursor{}; }

    /// Moves to the child keyed `ch`, creating it if needed, and counts the
    /// traversal. `ch` must not be a word separator; the trie itself does not
    /// know the separator set, callers enforce it.
    Cursor descend_or_create(Cursor at, char32_t ch);

    /// Terminates the word spelled by the path to `at` and returns the root.
    /// At the root this is a no-op (consecutive separators).
    Cursor end_word(Cursor at, Timestamp now);

    /// Top-n children of `at` by weight. Only `at`'s child list is inspected.
    PredictionSet predict_at(Cursor at, std::size_t n) const;

    /// Evicts least recently completed words until word_count() <= budget.
    std::vector<RemovedWord> prune_to_budget(std::size_t word_budget);

    /// Same as typing `word` once and then a separator at `now`.
    void preload_word(std::u32string_view word, Timestamp now, const SeparatorSet& separators);

    std::size_t word_count() const noexcept { return lru_.size(); }
    std::size_t node_count() const noexcept { return live_nodes_; }

    // Inspection.
    std::optional<Cursor> find(std::u32string_view path) const;
    std::optional<Cursor> child(Cursor at, char32_t ch) const;
    std::vector<Cursor> children(Cursor at) const;
    char32_t key(Cursor at) const;
    std::uint64_t weight(Cursor at) const;
    const WordEnd* word_end(Cursor at) const;
    std::u32string spell(Cursor at) const;
    Cursor parent(Cursor at) const;

    /// Completed words, least recently used first.
    std::vector<std::pair<Cursor, WordEnd>> words_by_recency() const;

    /// Structural invariant check. Returns a description per violation.
    /// With `terminated` set, also requires that no in-progress word is
    /// pending: every leaf has a marker and weight slack equals the marker
    /// count.
    std::vector<std::string> validate(bool terminated = true) const;

    /// Number of nodes inspected or touched since the last reset.
    std::uint64_t visits() const noexcept { return visits_; }
    void reset_visits() noexcept { visits_ = 0; }

    // Restoration from persisted form. Callers must call validate() afterwards.
    Cursor restore_child(Cursor parent, char32_t ch, std::uint64_t weight);
    void restore_word_end(Cursor at, const WordEnd& marker);

private:
    // The weight of a node lives on the edge that leads to it, so ranking a
    // node's children reads only that node's edge list.
    struct Edge {
        char32_t key;
        Cursor::NodeId child;
        std::uint64_t weight;
    };

    struct Node {
        boost::container::small_vector<Edge, 1> edges;
        Cursor::NodeId parent = 0;
        char32_t key = 0;
        bool live = false;
        bool has_end = false;
    };

    struct LruKey {
        Timestamp last_used;
        std::uint64_t seq;
        Cursor::NodeId node;

        friend auto operator<=>(const LruKey&, const LruKey&) = default;
    };

    const Node& node(Cursor at) const;
    Node& node(Cursor at);
    Cursor allocate(Cursor parent, char32_t ch, std::uint64_t weight);
    Edge* edge_to(Cursor at);
    const Edge* edge_to(Cursor at) const;
    void release(Cursor at);
    void mark_word_end(Cursor at, std::uint64_t count, Timestamp now);
    RemovedWord evict(Cursor at);

    std::vector<Node> nodes_;
    std::vector<WordEnd> ends_;  // indexed like nodes_, meaningful where has_end
    std::vector<Cursor::NodeId> free_;
    std::set<LruKey> lru_;
    std::size_t live_nodes_ = 0;
    std::uint64_t next_seq_ = 1;
    mutable std::uint64_t visits_ = 0;
};

}  // namespace nextkey
