#ifndef SHRINK_WORD_HPP_
#define SHRINK_WORD_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace shrink {

using Symbol = std::uint8_t;

/// Finite word over {0, ..., N-1}. Printed 1-based.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  /// Parses "121" or "1.2.1" (1-based symbols); "" and "e" give the empty word.
  static Word parse(std::string_view text);
  static Word from_zero_based(std::initializer_list<int> symbols);

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t k) const { return symbols_[k]; }
  Symbol& operator[](std::size_t k) { return symbols_[k]; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  void push_back(Symbol a) { symbols_.push_back(a); }
  void pop_back() { symbols_.pop_back(); }
  void resize(std::size_t n) { symbols_.resize(n); }
  void append(const Word& other);

  /// First n symbols (i|_n). Throws OutOfRange when n > size().
  Word prefix(std::size_t n) const;
  /// Symbols n..size()-1 (the shift sigma^n applied to the word).
  Word suffix_from(std::size_t n) const;
  /// Symbols [from, to).
  Word slice(std::size_t from, std::size_t to) const;
  bool starts_with(const Word& u) const;

  /// Largest symbol + 1; 0 for the empty word.
  int min_alphabet() const;

  std::string to_string(int alphabet = 0) const;

  friend Word operator+(Word lhs, const Word& rhs) {
    lhs.append(rhs);
    return lhs;
  }
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word& a, const Word& b) { return a.symbols_ <=> b.symbols_; }

 private:
  std::vector<Symbol> symbols_;
};

/// N^n, throwing BudgetExceeded when it exceeds cap.
std::uint64_t word_count(int alphabet, int length, std::uint64_t cap);

/// Number of words of length 0..max_length.
std::uint64_t word_count_upto(int alphabet, int max_length, std::uint64_t cap);

/// Lexicographic odometer over A^n.
class WordOdometer {
 public:
  WordOdometer(int alphabet, int length);
  const Word& word() const { return word_; }
  /// Moves to the next word. Returns false after the last one.
  bool advance();
  /// First position modified by the last advance().
  std::size_t changed_from() const { return changed_from_; }

 private:
  int alphabet_;
  Word word_;
  std::size_t changed_from_ = 0;
};

/// All words of length n in lexicographic order. Throws BudgetExceeded past cap.
std::vector<Word> enumerate_words(int alphabet, int length, std::uint64_t cap);

/// All words of length 0..max_length, shorter first, lexicographic within a length.
std::vector<Word> enumerate_words_upto(int alphabet, int max_length, std::uint64_t cap);

}  // namespace shrink

#endif  // SHRINK_WORD_HPP_
