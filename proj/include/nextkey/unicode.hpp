#pragma once
// UTF-8 conversion and word-separator sets. Keys are Unicode scalar values.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nextkey {

/// Seconds since the Unix epoch (UTC).
using Timestamp = std::int64_t;

class Utf8Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes UTF-8 into scalar values. Throws Utf8Error on malformed input,
/// overlong forms, surrogates and values above U+10FFFF.
std::u32string decode_utf8(std::string_view text);

std::string encode_utf8(char32_t ch);
std::string encode_utf8(std::u32string_view text);

/// True for the characters carrying the Unicode White_Space property.
bool is_unicode_whitespace(char32_t ch) noexcept;

/// The set of characters that terminate a word. Defaults to Unicode whitespace.
class SeparatorSet {
public:
    SeparatorSet() = default;
    explicit SeparatorSet(std::u32string chars);

    static SeparatorSet whitespace() { return SeparatorSet{}; }

    bool contains(char32_t ch) const noexcept;
    bool is_default() const noexcept { return !custom_; }

    // Explicit members, sorted and deduplicated. Empty for the default set.
    const std::u32string& chars() const noexcept { return chars_; }

    // A representative separator, used for synthetic word terminators.
    char32_t primary() const noexcept;

    friend bool operator==(const SeparatorSet&, const SeparatorSet&) = default;

private:
    bool custom_ = false;
    std::u32string chars_;
};

}  // namespace nextkey
