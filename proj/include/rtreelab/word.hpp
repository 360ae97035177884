#pragma once

#include <string>
#include <vector>

#include "errors.hpp"

namespace rtreelab {

// A letter of the free group F_r: generator index 0..r-1 and exponent +-1.
struct Letter {
  int gen = 0;
  int exp = 1;
  friend bool operator==(const Letter&, const Letter&) = default;
  Letter inverse() const { return {gen, -exp}; }
};

// Freely reduced word.  Text syntax: 'a'..'z' are generators 0.., 'A'..'Z'
// their inverses, "" or "1" the identity.
class Word {
 public:
  Word() = default;

  static Word reduce(const std::vector<Letter>& raw) {
    Word w;
    for (const Letter& l : raw) w.push_reduce(l);
    return w;
  }

  static Word parse(const std::string& text) {
    if (text == "1" || text == "id") return Word();
    std::vector<Letter> raw;
    for (char ch : text) {
      if (ch == ' ' || ch == '.') continue;
      if (ch >= 'a' && ch <= 'z')
        raw.push_back({ch - 'a', +1});
      else if (ch >= 'A' && ch <= 'Z')
        raw.push_back({ch - 'A', -1});
      else
        throw InputError(std::string("bad word character: '") + ch + "'");
    }
    return reduce(raw);
  }

  std::string str() const {
    if (letters_.empty()) return "1";
    std::string out;
    for (const Letter& l : letters_)
      out += static_cast<char>((l.exp > 0 ? 'a' : 'A') + l.gen);
    return out;
  }

  size_t length() const { return letters_.size(); }
  bool trivial() const { return letters_.empty(); }
  const std::vector<Letter>& letters() const { return letters_; }
  const Letter& at(size_t i) const { return letters_.at(i); }
  int max_gen() const {
    int m = -1;
    for (const Letter& l : letters_) m = std::max(m, l.gen);
    return m;
  }

  void push_reduce(const Letter& l) {
    if (!letters_.empty() && letters_.back().gen == l.gen &&
        letters_.back().exp == -l.exp)
      letters_.pop_back();
    else
      letters_.push_back(l);
  }

  friend Word operator*(const Word& a, const Word& b) {
    Word w = a;
    for (const Letter& l : b.letters_) w.push_reduce(l);
    return w;
  }

  Word inverse() const {
    Word w;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
      w.letters_.push_back(it->inverse());
    return w;
  }

  Word pow(int n) const {
    Word base = n >= 0 ? *this : inverse();
    Word w;
    for (int i = 0; i < std::abs(n); ++i) w = w * base;
    return w;
  }

  Word conjugate_by(const Word& g) const {  // g * w * g^-1
    return g * (*this) * g.inverse();
  }

  // Cyclic reduction: returns (core, conjugator c) with *this == c * core * c^-1.
  std::pair<Word, Word> cyclic_reduce() const {
    Word core = *this, conj;
    while (core.length() >= 2 &&
           core.letters_.front() == core.letters_.back().inverse()) {
      Word c;
      c.letters_.push_back(core.letters_.front());
      conj = conj * c;
      core.letters_.erase(core.letters_.begin());
      core.letters_.pop_back();
    }
    return {core, conj};
  }

  // Substitute: generator i maps to images[i]; result freely reduced.
  Word substitute(const std::vector<Word>& images) const {
    Word out;
    for (const Letter& l : letters_) {
      const Word& img = images.at(l.gen);
      const Word piece = l.exp > 0 ? img : img.inverse();
      for (const Letter& m : piece.letters()) out.push_reduce(m);
    }
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend bool operator<(const Word& a, const Word& b) {  // length then lex
    if (a.length() != b.length()) return a.length() < b.length();
    for (size_t i = 0; i < a.length(); ++i) {
      if (a.letters_[i].gen != b.letters_[i].gen)
        return a.letters_[i].gen < b.letters_[i].gen;
      if (a.letters_[i].exp != b.letters_[i].exp)
        return a.letters_[i].exp > b.letters_[i].exp;  // x before X
    }
    return false;
  }

 private:
  std::vector<Letter> letters_;
};

}  // namespace rtreelab
