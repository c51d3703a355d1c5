#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace grl {

// Lowercase, drop punctuation, drop the articles a/an/the, turn underscores
// into spaces, collapse whitespace, trim. Idempotent.
//
// Details: lowercasing covers ASCII and Latin-1 letters. Punctuation is
// ASCII punctuation except '_' plus the Unicode punctuation blocks (general
// categories Pd/Ps/Pe/Pi/Pf/Po). Articles are matched as whole words, where
// whitespace and '_' separate words.
std::string normalize_answer(std::string_view text);

// Whitespace tokens of the normalized text.
std::vector<std::string> answer_tokens(std::string_view text);

// 1 if the normalized prediction equals any normalized gold, else 0.
double exact_match(std::string_view prediction,
                   const std::vector<std::string>& golds);

// Bag-of-tokens F1 of two token lists. Empty vs empty scores 1.
double token_f1(const std::vector<std::string>& pred,
                const std::vector<std::string>& gold);

// Max token F1 over the golds.
double f1_score(std::string_view prediction,
                const std::vector<std::string>& golds);

}  // namespace grl
