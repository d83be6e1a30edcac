#pragma once
// Hand-rolled random instance generators for the property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : eng_(seed) {}

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  bool coin() { return index(0, 1) == 1; }

  // 'C' / 'X' / 'M' string, length in [lo, hi].
  std::string verdicts(std::size_t lo, std::size_t hi) {
    std::string s(index(lo, hi), 'M');
    for (auto& c : s) c = "CXM"[index(0, 2)];
    return s;
  }

  std::vector<double> probs(std::size_t lo, std::size_t hi) {
    std::vector<double> v(index(lo, hi));
    for (auto& x : v) x = unit();
    return v;
  }

  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }

  std::string word(std::size_t len) {
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + index(0, 25));
    return w;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gen
