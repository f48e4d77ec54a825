#pragma once
// Loading and filtering of message corpora and dictionary word lists.
//
// Corpus files are JSON Lines: {"ts": <epoch seconds>, "text": <string>}.
// Retweets ("RT @" prefix) are dropped, http(s) link tokens are removed, and
// everything else (mentions, hashtags, case) is kept as typed.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nextkey/message.hpp"

namespace nextkey {

struct CorpusStats {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t dropped_retweets = 0;
    std::size_t dropped_empty = 0;
    std::size_t stripped_links = 0;

    std::size_t dropped() const noexcept { return dropped_retweets + dropped_empty; }
};

struct Corpus {
    std::vector<Message> messages;
    CorpusStats stats;
};

/// A line that is not a valid corpus record.
class CorpusFormatError : public std::runtime_error {
public:
    CorpusFormatError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

bool is_retweet(std::string_view text);

/// Removes http:// and https:// tokens together with one adjacent whitespace
/// run, then trims. Returns the number of tokens removed.
std::size_t strip_links(std::string& text);

Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<Message>& messages);

/// Trimmed, non-empty, first-occurrence-ordered unique lines.
std::vector<std::string> parse_wordlist(std::istream& in);
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

}  // namespace nextkey
