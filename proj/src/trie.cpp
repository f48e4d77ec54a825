#include "nextkey/trie.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace nextkey {

bool PredictionSet::contains(char32_t ch) const noexcept {
    return std::any_of(entries.begin(), entries.end(),
                       [ch](const Prediction& e) { return e.ch == ch; });
}

WeightedTrie::WeightedTrie() {
    nodes_.emplace_back();
    nodes_.front().live = true;
    ends_.emplace_back();
}

const WeightedTrie::Node& WeightedTrie::node(Cursor at) const {
    if (at.id() >= nodes_.size() || !nodes_[at.id()].live) {
        throw std::out_of_range("cursor does not reference a live trie node");
    }
    return nodes_[at.id()];
}

WeightedTrie::Node& WeightedTrie::node(Cursor at) {
    return const_cast<Node&>(std::as_const(*this).node(at));
}

const WeightedTrie::Edge* WeightedTrie::edge_to(Cursor at) const {
    const Node& n = node(at);
    if (at.at_root()) {
        return nullptr;
    }
    for (const Edge& e : nodes_[n.parent].edges) {
        if (e.child == at.id()) {
            return &e;
        }
    }
    return nullptr;
}

WeightedTrie::Edge* WeightedTrie::edge_to(Cursor at) {
    return const_cast<Edge*>(std::as_const(*this).edge_to(at));
}

Cursor WeightedTrie::allocate(Cursor parent, char32_t ch, std::uint64_t weight) {
    Cursor::NodeId id;
    if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
    } else {
        if (nodes_.size() >= UINT32_MAX) {
            throw std::length_error("trie node capacity exhausted");
        }
        id = static_cast<Cursor::NodeId>(nodes_.size());
        nodes_.emplace_back();
        ends_.emplace_back();
    }
    Node& n = nodes_[id];
    n.key = ch;
    n.parent = parent.id();
    n.edges.clear();
    n.live = true;
    n.has_end = false;
    nodes_[parent.id()].edges.push_back(Edge{ch, id, weight});
    ++live_nodes_;
    return Cursor{id};
}

void WeightedTrie::release(Cursor at) {
    Node& n = nodes_[at.id()];
    auto& siblings = nodes_[n.parent].edges;
    siblings.erase(std::find_if(siblings.begin(), siblings.end(),
                                [&](const Edge& e) { return e.child == at.id(); }));
    n.live = false;
    n.has_end = false;
    n.edges.clear();
    n.edges.shrink_to_fit();
    free_.push_back(at.id());
    --live_nodes_;
}

Cursor WeightedTrie::descend_or_create(Cursor at, char32_t ch) {
    Node& here = node(at);
    ++visits_;
    for (Edge& e : here.edges) {
        if (e.key == ch) {
            ++e.weight;
            return Cursor{e.child};
        }
    }
    return allocate(at, ch, 1);
}

void WeightedTrie::mark_word_end(Cursor at, std::uint64_t count, Timestamp now) {
    Node& n = node(at);
    WordEnd& end = ends_[at.id()];
    if (n.has_end) {
        lru_.erase(LruKey{end.last_used, end.seq, at.id()});
        end.count += count;
        end.last_used = std::max(end.last_used, now);
        end.seq = next_seq_++;
    } else {
        end = WordEnd{count, now, next_seq_++};
        n.has_end = true;
    }
    lru_.insert(LruKey{end.last_used, end.seq, at.id()});
}

Cursor WeightedTrie::end_word(Cursor at, Timestamp now) {
    if (at.at_root()) {
        return root();
    }
    ++visits_;
    mark_word_end(at, 1, now);
    return root();
}

PredictionSet WeightedTrie::predict_at(Cursor at, std::size_t n) const {
    if (n == 0) {
        throw std::invalid_argument("prediction bound must be at least 1");
    }
    const Node& here = node(at);
    ++visits_;
    PredictionSet out;
    out.bound = n;
    if (here.edges.empty()) {
        return out;
    }

    const auto ranked_before = [](const Edge* a, const Edge* b) {
        return a->weight != b->weight ? a->weight > b->weight : a->key < b->key;
    };
    const std::size_t keep = std::min(n, here.edges.size());
    std::uint64_t total = 0;
    boost::container::small_vector<const Edge*, 32> ranked;
    for (const Edge& e : here.edges) {
        ranked.push_back(&e);
        total += e.weight;
    }
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                      ranked.end(), ranked_before);

    out.entries.reserve(keep);
    const double denom = static_cast<double>(total);
    for (std::size_t i = 0; i < keep; ++i) {
        out.entries.push_back({ranked[i]->key, static_cast<double>(ranked[i]->weight) / denom});
    }
    return out;
}

RemovedWord WeightedTrie::evict(Cursor at) {
    Node& word_node = node(at);
    const WordEnd marker = ends_[at.id()];
    RemovedWord removed{spell(at), marker.count, marker.last_used};

    lru_.erase(LruKey{marker.last_used, marker.seq, at.id()});
    word_node.has_end = false;

    // Every completion of this word traversed the whole path once.
    Cursor cur = at;
    while (!cur.at_root()) {
        ++visits_;
        Edge& in = *edge_to(cur);
        in.weight = in.weight > marker.count ? in.weight - marker.count : 0;
        const Cursor up{nodes_[cur.id()].parent};
        if (in.weight == 0) {
            release(cur);
        }
        cur = up;
    }
    return removed;
}

std::vector<RemovedWord> WeightedTrie::prune_to_budget(std::size_t word_budget) {
    if (word_budget == 0) {
        throw std::invalid_argument("word budget must be at least 1");
    }
    std::vector<RemovedWord> removed;
    while (lru_.size() > word_budget) {
        removed.push_back(evict(Cursor{lru_.begin()->node}));
    }
    return removed;
}

void WeightedTrie::preload_word(std::u32string_view word, Timestamp now,
                                const SeparatorSet& separators) {
    if (word.empty()) {
        throw std::invalid_argument("cannot preload an empty word");
    }
    if (std::any_of(word.begin(), word.end(),
                    [&](char32_t ch) { return separators.contains(ch); })) {
        throw std::invalid_argument("preloaded word contains a separator: " + encode_utf8(word));
    }
    Cursor cur = root();
    for (char32_t ch : word) {
        cur = descend_or_create(cur, ch);
    }
    end_word(cur, now);
}

std::optional<Cursor> WeightedTrie::child(Cursor at, char32_t ch) const {
    for (const Edge& e : node(at).edges) {
        if (e.key == ch) {
            return Cursor{e.child};
        }
    }
    return std::nullopt;
}

std::optional<Cursor> WeightedTrie::find(std::u32string_view path) const {
    Cursor cur = root();
    for (char32_t ch : path) {
        auto next = child(cur, ch);
        if (!next) {
            return std::nullopt;
        }
        cur = *next;
    }
    return cur;
}

std::vector<Cursor> WeightedTrie::children(Cursor at) const {
    const Node& n = node(at);
    std::vector<Cursor> out;
    out.reserve(n.edges.size());
    for (const Edge& e : n.edges) {
        out.emplace_back(e.child);
    }
    return out;
}

char32_t WeightedTrie::key(Cursor at) const {
    return node(at).key;
}

std::uint64_t WeightedTrie::weight(Cursor at) const {
    const Edge* in = edge_to(at);
    return in ? in->weight : 0;
}

const WordEnd* WeightedTrie::word_end(Cursor at) const {
    return node(at).has_end ? &ends_[at.id()] : nullptr;
}

Cursor WeightedTrie::parent(Cursor at) const {
    return Cursor{node(at).parent};
}

std::u32string WeightedTrie::spell(Cursor at) const {
    std::u32string word;
    for (Cursor cur = at; !cur.at_root(); cur = Cursor{node(cur).parent}) {
        word.push_back(node(cur).key);
    }
    std::reverse(word.begin(), word.end());
    return word;
}

std::vector<std::pair<Cursor, WordEnd>> WeightedTrie::words_by_recency() const {
    std::vector<std::pair<Cursor, WordEnd>> out;
    out.reserve(lru_.size());
    for (const LruKey& k : lru_) {
        out.emplace_back(Cursor{k.node}, ends_[k.node]);
    }
    return out;
}

Cursor WeightedTrie::restore_child(Cursor parent, char32_t ch, std::uint64_t weight) {
    if (child(parent, ch)) {
        throw std::invalid_argument("duplicate child key " + encode_utf8(ch));
    }
    return allocate(parent, ch, weight);
}

void WeightedTrie::restore_word_end(Cursor at, const WordEnd& marker) {
    if (at.at_root()) {
        throw std::invalid_argument("the root cannot end a word");
    }
    Node& n = node(at);
    WordEnd& end = ends_[at.id()];
    if (n.has_end) {
        lru_.erase(LruKey{end.last_used, end.seq, at.id()});
    }
    end = marker;
    n.has_end = true;
    lru_.insert(LruKey{marker.last_used, marker.seq, at.id()});
    next_seq_ = std::max(next_seq_, marker.seq + 1);
}

std::vector<std::string> WeightedTrie::validate(bool terminated) const {
    std::vector<std::string> problems;
    std::size_t reachable = 0;
    std::size_t markers = 0;
    struct Pending {
        Cursor at;
        std::uint64_t weight;
    };
    std::vector<Pending> stack{{root(), 0}};
    while (!stack.empty()) {
        const auto [at, weight] = stack.back();
        stack.pop_back();
        const Node& n = nodes_[at.id()];
        std::uint64_t child_sum = 0;
        std::vector<char32_t> keys;
        for (const Edge& e : n.edges) {
            if (e.child >= nodes_.size() || !nodes_[e.child].live ||
                nodes_[e.child].parent != at.id() || nodes_[e.child].key != e.key) {
                problems.push_back("dangling child under node " + std::to_string(at.id()));
                continue;
            }
            child_sum += e.weight;
            keys.push_back(e.key);
            stack.push_back({Cursor{e.child}, e.weight});
        }
        std::sort(keys.begin(), keys.end());
        if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
            problems.push_back("duplicate child keys under node " + std::to_string(at.id()));
        }
        if (at.at_root()) {
            continue;
        }
        ++reachable;
        const std::string where = "node \"" + encode_utf8(spell(at)) + "\"";
        const WordEnd& end = ends_[at.id()];
        const std::uint64_t own = n.has_end ? end.count : 0;
        if (n.has_end) {
            ++markers;
            if (end.count == 0) {
                problems.push_back(where + " has a zero completion count");
            }
            if (!lru_.contains(LruKey{end.last_used, end.seq, at.id()})) {
                problems.push_back(where + " is missing from the recency index");
            }
        }
        if (weight == 0) {
            problems.push_back(where + " has zero weight");
        }
        if (weight < child_sum + own) {
            problems.push_back(where + " weight is below children plus completions");
        }
        if (terminated) {
            if (weight != child_sum + own) {
                problems.push_back(where + " has unterminated traversals");
            }
            if (n.edges.empty() && !n.has_end) {
                problems.push_back(where + " is a leaf without a word end");
            }
        }
    }
    if (reachable != live_nodes_) {
        problems.push_back("node_count " + std::to_string(live_nodes_) + " but " +
                           std::to_string(reachable) + " reachable");
    }
    if (markers != lru_.size()) {
        problems.push_back("word_count " + std::to_string(lru_.size()) + " but " +
                           std::to_string(markers) + " markers");
    }
    return problems;
}

}  // namespace nextkey
