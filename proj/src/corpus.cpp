#include "nextkey/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "nextkey/unicode.hpp"

namespace nextkey {

using json = nlohmann::json;

namespace {

// Index range of a whitespace-delimited token in a decoded string.
struct Span {
    std::size_t begin;
    std::size_t end;
};

std::u32string trimmed(std::u32string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_unicode_whitespace(s[b])) {
        ++b;
    }
    while (e > b && is_unicode_whitespace(s[e - 1])) {
        --e;
    }
    return std::u32string(s.substr(b, e - b));
}

bool is_link(std::u32string_view token) {
    return token.starts_with(U"http://") || token.starts_with(U"https://");
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

}  // namespace

CorpusFormatError::CorpusFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

bool is_retweet(std::string_view text) {
    const std::u32string t = trimmed(decode_utf8(text));
    return t.starts_with(U"RT @");
}

std::size_t strip_links(std::string& text) {
    const std::u32string s = decode_utf8(text);
    std::vector<Span> tokens;
    for (std::size_t i = 0; i < s.size();) {
        if (is_unicode_whitespace(s[i])) {
            ++i;
            continue;
        }
        const std::size_t b = i;
        while (i < s.size() && !is_unicode_whitespace(s[i])) {
            ++i;
        }
        tokens.push_back({b, i});
    }

    std::vector<Span> cuts;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const Span tok = tokens[k];
        if (!is_link(std::u32string_view(s).substr(tok.begin, tok.end - tok.begin))) {
            continue;
        }
        // Take the following whitespace run; for the last token take the
        // preceding one instead.
        if (k + 1 < tokens.size()) {
            cuts.push_back({tok.begin, tokens[k + 1].begin});
        } else if (k > 0) {
            cuts.push_back({tokens[k - 1].end, tok.end});
        } else {
            cuts.push_back(tok);
        }
    }
    if (cuts.empty()) {
        text = encode_utf8(trimmed(s));
        return 0;
    }

    std::u32string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    for (const Span& c : cuts) {
        if (c.begin > pos) {
            out.append(s, pos, c.begin - pos);
        }
        pos = std::max(pos, c.end);
    }
    out.append(s, pos, std::u32string::npos);
    text = encode_utf8(trimmed(out));
    return cuts.size();
}

Corpus parse_corpus(std::istream& in) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw CorpusFormatError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object()) {
            throw CorpusFormatError(line_no, "record is not a JSON object");
        }
        const auto ts = record.find("ts");
        if (ts == record.end() || !ts->is_number_integer()) {
            throw CorpusFormatError(line_no, "\"ts\" must be an integer");
        }
        const auto text = record.find("text");
        if (text == record.end() || !text->is_string()) {
            throw CorpusFormatError(line_no, "\"text\" must be a string");
        }

        Message m{ts->get<Timestamp>(), text->get<std::string>()};
        ++corpus.stats.total;
        try {
            if (is_retweet(m.text)) {
                ++corpus.stats.dropped_retweets;
                continue;
            }
            corpus.stats.stripped_links += strip_links(m.text);
        } catch (const Utf8Error& e) {
            throw CorpusFormatError(line_no, e.what());
        }
        if (m.text.empty()) {
            ++corpus.stats.dropped_empty;
            continue;
        }
        ++corpus.stats.kept;
        corpus.messages.push_back(std::move(m));
    }
    std::stable_sort(corpus.messages.begin(), corpus.messages.end(),
                     [](const Message& a, const Message& b) { return a.ts < b.ts; });
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Message>& messages) {
    for (const Message& m : messages) {
        out << json{{"ts", m.ts}, {"text", m.text}}.dump() << '\n';
    }
}

std::vector<std::string> parse_wordlist(std::istream& in) {
    std::vector<std::string> words;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        std::string word = encode_utf8(trimmed(decode_utf8(line)));
        if (word.empty() || !seen.insert(word).second) {
            continue;
        }
        words.push_back(std::move(word));
    }
    return words;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return parse_wordlist(in);
}

}  // namespace nextkey
