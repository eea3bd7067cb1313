#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace perseval::text {

enum class TokenScheme { word_lower };

using TokenSequence = std::vector<std::string>;

/// Splits UTF-8 text on whitespace and punctuation/symbol code points and
/// lowercases each token. Invalid UTF-8 bytes act as separators.
TokenSequence tokenize(std::string_view text, TokenScheme scheme = TokenScheme::word_lower);

/// Porter (1980) suffix-stripping stemmer. Expects a lowercase token; tokens
/// containing non-ASCII letters are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace perseval::text
