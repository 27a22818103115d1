#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chaosgame {

/// Finite word over the alphabet {1, ..., alphabet}.
struct Word {
  std::vector<int> symbols;
  int alphabet = 2;

  std::size_t size() const { return symbols.size(); }
  friend bool operator==(const Word&, const Word&) = default;
};

/// Throws ValidationError unless every symbol lies in 1..alphabet.
void validate_word(const Word& word);

/// Producer behind a DriverStream. Implementations are deterministic cursors.
class SymbolSource {
 public:
  virtual ~SymbolSource() = default;
  virtual int next() = 0;
  virtual std::unique_ptr<SymbolSource> clone() const = 0;
};

/// Infinite (or, for literal words, finite) symbol driver i = (i_1, i_2, ...).
///
/// A stream is a single-consumer cursor: next() returns i_{position()+1} and
/// advances. clone() yields an independent cursor at the same position.
class DriverStream {
 public:
  DriverStream(std::string id, int alphabet, std::unique_ptr<SymbolSource> source);
  DriverStream(DriverStream&&) noexcept = default;
  DriverStream& operator=(DriverStream&&) noexcept = default;

  int next() {
    ++position_;
    return source_->next();
  }
  std::uint64_t position() const { return position_; }
  int alphabet() const { return alphabet_; }
  const std::string& id() const { return id_; }

  DriverStream clone() const;

  /// Consumes and returns the next n symbols.
  Word take(std::size_t n);

 private:
  std::string id_;
  int alphabet_;
  std::uint64_t position_ = 0;
  std::unique_ptr<SymbolSource> source_;
};

/// Default ceiling on K^m-sized tables (words, bitsets).
inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 28;
inline constexpr std::uint64_t kDefaultCoverageCap = 1'000'000'000;

/// K^m, or nullopt if it overflows or exceeds `budget`.
std::optional<std::uint64_t> checked_power(std::uint64_t base, unsigned exp,
                                           std::uint64_t budget = UINT64_MAX);

/// de Bruijn extension step: 1 for K >= 3, 2 for K = 2.
int de_bruijn_step(int alphabet);

/// All words of length 1, then length 2, ..., each length block in
/// lexicographic order.
DriverStream champernowne(int alphabet);

/// Noncyclic de Bruijn word of order m: length K^m + m - 1 with every m-word
/// occurring exactly once. Built from an Euler circuit of the order-(m-1)
/// de Bruijn graph.
Word de_bruijn_word(int alphabet, int order, std::uint64_t budget = kDefaultWordBudget);

/// Order of `word` as a noncyclic de Bruijn word, or nullopt if it is not one.
std::optional<int> de_bruijn_order(const Word& word);

/// Extends a de Bruijn word of order m to one of order `target_order` that has
/// it as a prefix. Throws InvariantViolation("extension not found") when no
/// such extension exists.
Word extend_de_bruijn_to(const Word& word, int target_order,
                         std::uint64_t budget = kDefaultWordBudget);

/// Extends to order m + de_bruijn_step(K).
Word extend_de_bruijn(const Word& word, std::uint64_t budget = kDefaultWordBudget);

/// Inductive limit of de Bruijn extensions: orders 1, 2, 3, ... for K >= 3 and
/// 2, 4, 6, ... for K = 2.
DriverStream infinite_de_bruijn(int alphabet);

/// Block layout of the two-map separating driver for exponent z.
struct Example4Layout {
  double z;
  int k1;  // least k1 with k < 2^{kz} for all k >= k1
  int k2;  // least k2 with (k+1) 2^{kz} > 1/(2^z - 1) for all k >= k2
  int k0;  // max(k1, k2); blocks exist for k >= 2 k0

  int first_block() const { return 2 * k0; }
  /// floor(k 2^{kz}), the 1-based position of the first symbol of block k.
  std::uint64_t block_start(int k) const;
};

Example4Layout example4_layout(double z);

/// i_n = 1 for floor(k 2^{kz}) <= n <= floor(k 2^{kz}) + k - 1 (k >= 2 k0),
/// i_n = 2 otherwise.
DriverStream example4_driver(double z);

/// i.i.d. uniform symbols from a seeded mt19937_64.
DriverStream random_driver(int alphabet, std::uint64_t seed);

/// Emits `word` and then throws CapExceeded.
DriverStream literal_driver(Word word);

struct CoverageStat {
  int m;
  std::optional<std::uint64_t> n;  // nullopt: exceeded cap
  std::uint64_t cap;
};

/// Least prefix length of the driver that contains every word of length m,
/// scanning at most `cap` symbols. Consumes the stream.
CoverageStat word_coverage(DriverStream& driver, int m, std::uint64_t cap = kDefaultCoverageCap,
                           std::uint64_t budget = kDefaultWordBudget);

/// Upper bound K + 2K^2 + ... + mK^m on the Champernowne coverage index.
std::uint64_t champernowne_coverage_bound(int alphabet, int m);

}  // namespace chaosgame
