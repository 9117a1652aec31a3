#include "shrink/word.hpp"

#include <algorithm>
#include <sstream>

#include "shrink/error.hpp"

namespace shrink {

Word Word::parse(std::string_view text) {
  Word w;
  if (text.empty() || text == "e") return w;
  if (text.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t stop = text.find('.', start);
      if (stop == std::string_view::npos) stop = text.size();
      int v = std::stoi(std::string(text.substr(start, stop - start)));
      if (v < 1 || v > 256) throw ValidationError("word: symbol out of range in '" + std::string(text) + "'");
      w.push_back(static_cast<Symbol>(v - 1));
      start = stop + 1;
    }
    return w;
  }
  for (char c : text) {
    if (c < '1' || c > '9') throw ValidationError("word: bad symbol in '" + std::string(text) + "'");
    w.push_back(static_cast<Symbol>(c - '1'));
  }
  return w;
}

Word Word::from_zero_based(std::initializer_list<int> symbols) {
  Word w;
  for (int a : symbols) w.push_back(static_cast<Symbol>(a));
  return w;
}

void Word::append(const Word& other) {
  symbols_.insert(symbols_.end(), other.symbols_.begin(), other.symbols_.end());
}

Word Word::prefix(std::size_t n) const {
  if (n > size()) throw OutOfRange("word: prefix longer than word");
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Word Word::suffix_from(std::size_t n) const {
  if (n > size()) throw OutOfRange("word: shift past end of word");
  return Word(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(n), symbols_.end()));
}

Word Word::slice(std::size_t from, std::size_t to) const {
  if (from > to || to > size()) throw OutOfRange("word: bad slice");
  return Word(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(from),
                                  symbols_.begin() + static_cast<std::ptrdiff_t>(to)));
}

bool Word::starts_with(const Word& u) const {
  return u.size() <= size() && std::equal(u.begin(), u.end(), begin());
}

int Word::min_alphabet() const {
  if (empty()) return 0;
  return *std::max_element(begin(), end()) + 1;
}

std::string Word::to_string(int alphabet) const {
  if (empty()) return "e";
  const bool dotted = std::max(alphabet, min_alphabet()) > 9;
  std::ostringstream out;
  for (std::size_t k = 0; k < size(); ++k) {
    if (dotted && k > 0) out << '.';
    out << static_cast<int>(symbols_[k]) + 1;
  }
  return out.str();
}

std::uint64_t word_count(int alphabet, int length, std::uint64_t cap) {
  std::uint64_t count = 1;
  for (int k = 0; k < length; ++k) {
    if (count > cap / static_cast<std::uint64_t>(alphabet)) {
      throw BudgetExceeded("enumeration: " + std::to_string(alphabet) + "^" + std::to_string(length) +
                           " words exceed budget " + std::to_string(cap));
    }
    count *= static_cast<std::uint64_t>(alphabet);
  }
  if (count > cap) throw BudgetExceeded("enumeration: word count exceeds budget " + std::to_string(cap));
  return count;
}

std::uint64_t word_count_upto(int alphabet, int max_length, std::uint64_t cap) {
  std::uint64_t total = 0;
  for (int n = 0; n <= max_length; ++n) {
    total += word_count(alphabet, n, cap);
    if (total > cap) throw BudgetExceeded("enumeration: word count exceeds budget " + std::to_string(cap));
  }
  return total;
}

WordOdometer::WordOdometer(int alphabet, int length)
    : alphabet_(alphabet), word_(std::vector<Symbol>(static_cast<std::size_t>(length), 0)) {}

bool WordOdometer::advance() {
  std::size_t k = word_.size();
  while (k > 0) {
    --k;
    if (word_[k] + 1 < alphabet_) {
      ++word_[k];
      changed_from_ = k;
      return true;
    }
    word_[k] = 0;
  }
  changed_from_ = 0;
  return false;
}

std::vector<Word> enumerate_words(int alphabet, int length, std::uint64_t cap) {
  std::vector<Word> out;
  out.reserve(word_count(alphabet, length, cap));
  WordOdometer odo(alphabet, length);
  do {
    out.push_back(odo.word());
  } while (odo.advance());
  return out;
}

std::vector<Word> enumerate_words_upto(int alphabet, int max_length, std::uint64_t cap) {
  word_count_upto(alphabet, max_length, cap);
  std::vector<Word> out;
  for (int n = 0; n <= max_length; ++n) {
    auto level = enumerate_words(alphabet, n, cap);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace shrink
