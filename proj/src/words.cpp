#include "chaosgame/words.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chaosgame/errors.hpp"
#include "chaosgame/text.hpp"

namespace chaosgame {

void validate_word(const Word& word) {
  if (word.alphabet < 1) throw ValidationError("alphabet size must be positive");
  for (int s : word.symbols) {
    if (s < 1 || s > word.alphabet) {
      throw ValidationError("invalid symbol " + std::to_string(s) + " for alphabet of size " +
                            std::to_string(word.alphabet));
    }
  }
}

DriverStream::DriverStream(std::string id, int alphabet, std::unique_ptr<SymbolSource> source)
    : id_(std::move(id)), alphabet_(alphabet), source_(std::move(source)) {}

DriverStream DriverStream::clone() const {
  DriverStream copy(id_, alphabet_, source_->clone());
  copy.position_ = position_;
  return copy;
}

Word DriverStream::take(std::size_t n) {
  Word w{{}, alphabet_};
  w.symbols.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.symbols.push_back(next());
  return w;
}

std::optional<std::uint64_t> checked_power(std::uint64_t base, unsigned exp, std::uint64_t budget) {
  std::uint64_t result = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && result > budget / base) return std::nullopt;
    result *= base;
  }
  if (result > budget) return std::nullopt;
  return result;
}

int de_bruijn_step(int alphabet) { return alphabet == 2 ? 2 : 1; }

namespace {

std::uint64_t require_power(int alphabet, int exp, std::uint64_t budget, const char* what) {
  auto p = checked_power(static_cast<std::uint64_t>(alphabet), static_cast<unsigned>(exp), budget);
  if (!p) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(alphabet) + "^" +
                         std::to_string(exp) + " exceeds budget " + std::to_string(budget));
  }
  return *p;
}

class ChampernowneSource final : public SymbolSource {
 public:
  explicit ChampernowneSource(int alphabet) : alphabet_(alphabet), digits_(1, 0) {}

  int next() override {
    const int s = digits_[index_] + 1;
    if (++index_ == digits_.size()) {
      index_ = 0;
      // Odometer increment; overflow moves on to the next word length.
      std::size_t i = digits_.size();
      while (i > 0 && digits_[i - 1] == alphabet_ - 1) digits_[--i] = 0;
      if (i == 0) {
        digits_.assign(digits_.size() + 1, 0);
      } else {
        ++digits_[i - 1];
      }
    }
    return s;
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<ChampernowneSource>(*this);
  }

 private:
  int alphabet_;
  std::vector<int> digits_;
  std::size_t index_ = 0;
};

/// Walks an Euler trail from `start` through the order-`order` de Bruijn graph
/// (nodes are (order-1)-words, edges are order-words), skipping edges already
/// marked in `used`. Returns the edge symbols (0-based) in walk order.
std::vector<int> hierholzer(int alphabet, std::uint64_t nodes, std::uint64_t start,
                            std::vector<bool>& used) {
  const auto k = static_cast<std::uint64_t>(alphabet);
  std::vector<std::uint32_t> next_symbol(nodes, 0);
  struct Frame {
    std::uint64_t node;
    int symbol;
  };
  std::vector<Frame> stack{{start, -1}};
  std::vector<int> reversed;
  while (!stack.empty()) {
    const std::uint64_t v = stack.back().node;
    bool advanced = false;
    while (next_symbol[v] < k) {
      const std::uint64_t s = next_symbol[v]++;
      const std::uint64_t edge = v * k + s;
      if (used[edge]) continue;
      used[edge] = true;
      stack.push_back({edge % nodes, static_cast<int>(s)});
      advanced = true;
      break;
    }
    if (!advanced) {
      if (stack.back().symbol >= 0) reversed.push_back(stack.back().symbol);
      stack.pop_back();
    }
  }
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

}  // namespace

DriverStream champernowne(int alphabet) {
  if (alphabet < 2) throw ValidationError("Champernowne driver needs K >= 2");
  return DriverStream("champernowne(K=" + std::to_string(alphabet) + ")", alphabet,
                      std::make_unique<ChampernowneSource>(alphabet));
}

Word de_bruijn_word(int alphabet, int order, std::uint64_t budget) {
  if (alphabet < 2) throw ValidationError("de Bruijn word needs K >= 2");
  if (order < 1) throw ValidationError("de Bruijn order must be >= 1");
  const std::uint64_t edges = require_power(alphabet, order, budget, "de Bruijn word");
  const std::uint64_t nodes = edges / static_cast<std::uint64_t>(alphabet);
  std::vector<bool> used(edges, false);
  const std::vector<int> trail = hierholzer(alphabet, nodes, 0, used);
  if (trail.size() != edges) throw InvariantViolation("de Bruijn circuit incomplete");

  Word w{{}, alphabet};
  w.symbols.reserve(edges + static_cast<std::uint64_t>(order) - 1);
  w.symbols.assign(static_cast<std::size_t>(order - 1), 1);  // label of node 0
  for (int s : trail) w.symbols.push_back(s + 1);
  return w;
}

std::optional<int> de_bruijn_order(const Word& word) {
  const auto k = static_cast<std::uint64_t>(word.alphabet);
  if (k < 2) return std::nullopt;
  for (int m = 1;; ++m) {
    auto km = checked_power(k, static_cast<unsigned>(m));
    if (!km || *km + static_cast<std::uint64_t>(m) - 1 > word.size()) return std::nullopt;
    if (*km + static_cast<std::uint64_t>(m) - 1 != word.size()) continue;
    std::vector<bool> seen(*km, false);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < word.size(); ++i) {
      const int s = word.symbols[i];
      if (s < 1 || s > word.alphabet) return std::nullopt;
      code = (code * k + static_cast<std::uint64_t>(s - 1)) % *km;
      if (i + 1 >= static_cast<std::size_t>(m)) {
        if (seen[code]) return std::nullopt;
        seen[code] = true;
      }
    }
    return m;
  }
}

Word extend_de_bruijn_to(const Word& word, int target_order, std::uint64_t budget) {
  const auto order = de_bruijn_order(word);
  if (!order) throw ValidationError("input is not a noncyclic de Bruijn word");
  if (target_order <= *order) throw ValidationError("target order must exceed the current order");
  const int alphabet = word.alphabet;
  const auto k = static_cast<std::uint64_t>(alphabet);
  const std::uint64_t edges = require_power(alphabet, target_order, budget, "de Bruijn extension");
  const std::uint64_t nodes = edges / k;
  const auto m = static_cast<std::size_t>(target_order);
  if (word.size() < m - 1) throw InvariantViolation("word shorter than a graph node label");

  // Edges already spelled by the prefix.
  std::vector<bool> used(edges, false);
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    code = (code * k + static_cast<std::uint64_t>(word.symbols[i] - 1)) % edges;
    if (i + 1 >= m) {
      if (used[code]) throw InvariantViolation("prefix repeats a word of the target order");
      used[code] = true;
    }
  }
  const std::uint64_t end_node = code % nodes;
  std::vector<int> tail = hierholzer(alphabet, nodes, end_node, used);

  Word out = word;
  for (int s : tail) out.symbols.push_back(s + 1);
  if (out.size() != edges + m - 1) {
    throw InvariantViolation("extension not found: order " + std::to_string(*order) + " -> " +
                             std::to_string(target_order) + " for K=" + std::to_string(alphabet));
  }
  return out;
}

Word extend_de_bruijn(const Word& word, std::uint64_t budget) {
  const auto order = de_bruijn_order(word);
  if (!order) throw ValidationError("input is not a noncyclic de Bruijn word");
  return extend_de_bruijn_to(word, *order + de_bruijn_step(word.alphabet), budget);
}

namespace {

class InfiniteDeBruijnSource final : public SymbolSource {
 public:
  explicit InfiniteDeBruijnSource(int alphabet)
      : order_(alphabet == 2 ? 2 : 1), word_(de_bruijn_word(alphabet, order_)) {}

  int next() override {
    if (pos_ == word_.size()) {
      order_ += de_bruijn_step(word_.alphabet);
      word_ = extend_de_bruijn_to(word_, order_);
    }
    return word_.symbols[pos_++];
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<InfiniteDeBruijnSource>(*this);
  }

 private:
  int order_;
  Word word_;
  std::size_t pos_ = 0;
};

class Example4Source final : public SymbolSource {
 public:
  explicit Example4Source(Example4Layout layout)
      : layout_(layout), k_(layout.first_block()), start_(layout.block_start(k_)) {}

  int next() override {
    ++n_;
    while (n_ > start_ + static_cast<std::uint64_t>(k_) - 1) {
      ++k_;
      start_ = layout_.block_start(k_);
    }
    return n_ >= start_ ? 1 : 2;
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<Example4Source>(*this);
  }

 private:
  Example4Layout layout_;
  int k_;
  std::uint64_t start_;
  std::uint64_t n_ = 0;
};

class RandomSource final : public SymbolSource {
 public:
  RandomSource(int alphabet, std::uint64_t seed) : alphabet_(alphabet), engine_(seed) {
    const std::uint64_t k = static_cast<std::uint64_t>(alphabet);
    limit_ = std::mt19937_64::max() - (std::mt19937_64::max() % k + 1) % k;
  }
  int next() override {
    // Rejection sampling keeps the map onto 1..K uniform and portable.
    std::uint64_t r;
    do {
      r = engine_();
    } while (r > limit_);
    return 1 + static_cast<int>(r % static_cast<std::uint64_t>(alphabet_));
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<RandomSource>(*this);
  }

 private:
  int alphabet_;
  std::mt19937_64 engine_;
  std::uint64_t limit_;
};

class LiteralSource final : public SymbolSource {
 public:
  explicit LiteralSource(Word word) : word_(std::move(word)) {}
  int next() override {
    if (pos_ == word_.size()) {
      throw CapExceeded("literal driver exhausted after " + std::to_string(word_.size()) +
                        " symbols");
    }
    return word_.symbols[pos_++];
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<LiteralSource>(*this);
  }

 private:
  Word word_;
  std::size_t pos_ = 0;
};

}  // namespace

DriverStream infinite_de_bruijn(int alphabet) {
  if (alphabet < 2) throw ValidationError("infinite de Bruijn driver needs K >= 2");
  return DriverStream("de_bruijn(K=" + std::to_string(alphabet) + ")", alphabet,
                      std::make_unique<InfiniteDeBruijnSource>(alphabet));
}

std::uint64_t Example4Layout::block_start(int k) const {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(k) * std::exp2(k * z)));
}

Example4Layout example4_layout(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw ValidationError("example4 driver needs z > 0");
  // Both conditions hold for all large k; 2^{kz}/k increases once
  // k > 1/(z ln 2), so checking up to a window past that point suffices.
  const int window = 64 + static_cast<int>(std::ceil(4.0 / (z * std::log(2.0))));
  const double threshold = 1.0 / (std::exp2(z) - 1.0);
  int k1 = 1, k2 = 1;
  for (int k = 1; k <= window; ++k) {
    const double p = std::exp2(k * z);
    if (!(static_cast<double>(k) < p)) k1 = k + 1;
    if (!((k + 1) * p > threshold)) k2 = k + 1;
  }
  return {z, k1, k2, std::max(k1, k2)};
}

DriverStream example4_driver(double z) {
  const Example4Layout layout = example4_layout(z);
  return DriverStream("example4(z=" + format_real(z) + ")", 2,
                      std::make_unique<Example4Source>(layout));
}

DriverStream random_driver(int alphabet, std::uint64_t seed) {
  if (alphabet < 1) throw ValidationError("random driver needs K >= 1");
  return DriverStream(
      "random(K=" + std::to_string(alphabet) + ",seed=" + std::to_string(seed) + ")", alphabet,
      std::make_unique<RandomSource>(alphabet, seed));
}

DriverStream literal_driver(Word word) {
  validate_word(word);
  const int alphabet = word.alphabet;
  return DriverStream("literal(len=" + std::to_string(word.size()) + ")", alphabet,
                      std::make_unique<LiteralSource>(std::move(word)));
}

CoverageStat word_coverage(DriverStream& driver, int m, std::uint64_t cap, std::uint64_t budget) {
  if (m < 1) throw ValidationError("word length must be >= 1");
  const auto k = static_cast<std::uint64_t>(driver.alphabet());
  const std::uint64_t words = require_power(driver.alphabet(), m, budget, "word coverage");
  std::vector<bool> seen(words, false);
  std::uint64_t distinct = 0;
  std::uint64_t code = 0;
  for (std::uint64_t n = 1; n <= cap; ++n) {
    const int s = driver.next();
    if (s < 1 || s > driver.alphabet()) throw ValidationError("invalid symbol in driver");
    code = (code * k + static_cast<std::uint64_t>(s - 1)) % words;
    if (n >= static_cast<std::uint64_t>(m) && !seen[code]) {
      seen[code] = true;
      if (++distinct == words) return {m, n, cap};
    }
  }
  return {m, std::nullopt, cap};
}

std::uint64_t champernowne_coverage_bound(int alphabet, int m) {
  // (K - K^{m+1}(m+1) + m K^{m+2}) / (K-1)^2, evaluated as the partial sum.
  std::uint64_t total = 0;
  std::uint64_t power = 1;
  for (int j = 1; j <= m; ++j) {
    power *= static_cast<std::uint64_t>(alphabet);
    total += static_cast<std::uint64_t>(j) * power;
  }
  return total;
}

}  // namespace chaosgame
