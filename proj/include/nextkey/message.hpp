#pragma once

#include <string>

#include "nextkey/unicode.hpp"

namespace nextkey {

/// A timestamped unit of previously typed text.
struct Message {
    Timestamp ts = 0;
    std::string text;  // UTF-8

    friend bool operator==(const Message&, const Message&) = default;
};

}  // namespace nextkey
