#include "grl/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "grl/error.hpp"

namespace grl {
namespace {

bool is_ascii_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
         (c >= 0x5b && c <= 0x60 && c != '_') || (c >= 0x7b && c <= 0x7e);
}

struct Range {
  char32_t lo;
  char32_t hi;
};

// Unicode punctuation (P* minus Pc) in the commonly used blocks.
constexpr Range kUnicodePunct[] = {
    {0x00a1, 0x00a1}, {0x00a7, 0x00a7}, {0x00ab, 0x00ab}, {0x00b6, 0x00b7},
    {0x00bb, 0x00bb}, {0x00bf, 0x00bf}, {0x037e, 0x037e}, {0x0387, 0x0387},
    {0x055a, 0x055f}, {0x0589, 0x058a}, {0x05be, 0x05be}, {0x05c0, 0x05c0},
    {0x05c3, 0x05c3}, {0x05c6, 0x05c6}, {0x05f3, 0x05f4}, {0x0609, 0x060a},
    {0x060c, 0x060d}, {0x061b, 0x061b}, {0x061d, 0x061f}, {0x066a, 0x066d},
    {0x06d4, 0x06d4}, {0x0964, 0x0965}, {0x0970, 0x0970}, {0x0e4f, 0x0e4f},
    {0x0e5a, 0x0e5b}, {0x2010, 0x2027}, {0x2030, 0x203e}, {0x2041, 0x2053},
    {0x2055, 0x205e}, {0x207d, 0x207e}, {0x208d, 0x208e}, {0x2308, 0x230b},
    {0x2329, 0x232a}, {0x2768, 0x2775}, {0x27c5, 0x27c6}, {0x27e6, 0x27ef},
    {0x2983, 0x2998}, {0x29d8, 0x29db}, {0x29fc, 0x29fd}, {0x2cf9, 0x2cfc},
    {0x2cfe, 0x2cff}, {0x2e00, 0x2e2e}, {0x2e30, 0x2e4f}, {0x3001, 0x3003},
    {0x3008, 0x3011}, {0x3014, 0x301f}, {0x3030, 0x3030}, {0x303d, 0x303d},
    {0x30a0, 0x30a0}, {0x30fb, 0x30fb}, {0xfe10, 0xfe19}, {0xfe30, 0xfe32},
    {0xfe35, 0xfe4c}, {0xfe50, 0xfe52}, {0xfe54, 0xfe61}, {0xfe63, 0xfe63},
    {0xfe68, 0xfe68}, {0xfe6a, 0xfe6b}, {0xff01, 0xff03}, {0xff05, 0xff0a},
    {0xff0c, 0xff0f}, {0xff1a, 0xff1b}, {0xff1f, 0xff20}, {0xff3b, 0xff3d},
    {0xff5b, 0xff5b}, {0xff5d, 0xff5d}, {0xff5f, 0xff65},
};

bool is_punct(char32_t c) {
  if (c < 0x80) return is_ascii_punct(c);
  for (const auto& r : kUnicodePunct) {
    if (c < r.lo) return false;
    if (c <= r.hi) return true;
  }
  return false;
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xc0 && c <= 0xde && c != 0xd7) return c + 32;
  return c;
}

// Lenient UTF-8 decoding. Invalid bytes are carried as 0xDC80 + byte and
// re-emitted unchanged by encode().
std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto raw = [&] {
      out.push_back(0xdc80 + b0);
      ++i;
    };
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xe0) == 0xc0) {
      len = 2;
      cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
      len = 3;
      cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      raw();
      continue;
    }
    if (i + len > s.size()) {
      raw();
      continue;
    }
    bool ok = true;
    for (std::size_t j = 1; j < len; ++j) {
      const auto b = static_cast<unsigned char>(s[i + j]);
      if ((b & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3f);
    }
    if (!ok) {
      raw();
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void encode(char32_t cp, std::string& out) {
  if (cp >= 0xdc80 && cp <= 0xdcff) {
    out.push_back(static_cast<char>(cp - 0xdc80));
  } else if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

bool is_word_break(char32_t c) { return is_ascii_space(c) || c == '_'; }

bool is_article(std::u32string_view w) {
  return w == U"a" || w == U"an" || w == U"the";
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::u32string s = decode(text);

  for (auto& c : s) c = to_lower(c);

  std::erase_if(s, is_punct);

  std::u32string no_articles;
  no_articles.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (is_word_break(s[i])) {
      no_articles.push_back(s[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !is_word_break(s[j])) ++j;
    const std::u32string_view word(s.data() + i, j - i);
    if (!is_article(word)) no_articles.append(word);
    i = j;
  }

  for (auto& c : no_articles) {
    if (c == '_') c = ' ';
  }

  std::string out;
  out.reserve(no_articles.size());
  bool pending_space = false;
  for (char32_t c : no_articles) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    encode(c, out);
  }
  return out;
}

std::vector<std::string> answer_tokens(std::string_view text) {
  const std::string norm = normalize_answer(text);
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    auto end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) tokens.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

double exact_match(std::string_view prediction,
                   const std::vector<std::string>& golds) {
  if (golds.empty()) throw ValidationError("exact_match: empty gold list");
  const std::string pred = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == pred) return 1.0;
  }
  return 0.0;
}

double token_f1(const std::vector<std::string>& pred,
                const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string_view, long> counts;
  for (const auto& t : gold) ++counts[t];
  long common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / pred.size();
  const double recall = static_cast<double>(common) / gold.size();
  return 2.0 * precision * recall / (precision + recall);
}

double f1_score(std::string_view prediction,
                const std::vector<std::string>& golds) {
  if (golds.empty()) throw ValidationError("f1_score: empty gold list");
  const auto pred = answer_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(pred, answer_tokens(g)));
  return best;
}

}  // namespace grl
