#include "rlab/strategy.hpp"

#include <algorithm>
#include <cctype>

#include "rlab/error.hpp"

namespace rlab {

StrategyVector::StrategyVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) fail(ErrorKind::invalid_strategy, "strategy must have at least one step");
  for (auto& b : bits_) {
    if (b > 1) fail(ErrorKind::invalid_strategy, "strategy entries must be 0 or 1");
  }
  if (bits_[0] != 1) {
    fail(ErrorKind::invalid_strategy, "the first step must compute: reuse needs a previously computed map");
  }
}

StrategyVector StrategyVector::all_ones(int n) {
  if (n < 1) fail(ErrorKind::invalid_strategy, "strategy length must be >= 1");
  return StrategyVector(std::vector<std::uint8_t>(static_cast<std::size_t>(n), 1));
}

StrategyVector StrategyVector::parse(std::string_view literal) {
  std::vector<std::uint8_t> bits;
  bool bracketed = false;
  std::string_view s = literal;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') fail(ErrorKind::invalid_strategy, "unterminated strategy literal '" + std::string(literal) + "'");
    bracketed = true;
    s = s.substr(1, s.size() - 2);
  }
  bool expect_digit = true;
  for (char ch : s) {
    if (ch == '0' || ch == '1') {
      if (bracketed && !expect_digit) {
        fail(ErrorKind::invalid_strategy, "missing separator in '" + std::string(literal) + "'");
      }
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
      expect_digit = !bracketed;
    } else if (bracketed && ch == ',' && !expect_digit) {
      expect_digit = true;
    } else if (bracketed && std::isspace(static_cast<unsigned char>(ch))) {
      continue;
    } else {
      fail(ErrorKind::invalid_strategy, "invalid character in strategy literal '" + std::string(literal) + "'");
    }
  }
  if (bracketed && expect_digit && !bits.empty()) {
    fail(ErrorKind::invalid_strategy, "trailing separator in '" + std::string(literal) + "'");
  }
  return StrategyVector(std::move(bits));
}

int StrategyVector::compute_count() const noexcept {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int StrategyVector::reuse_count() const noexcept { return size() - compute_count(); }

std::string StrategyVector::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::string StrategyVector::bracketed() const {
  std::string s = "[";
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (i) s += ",";
    s.push_back(static_cast<char>('0' + bits_[i]));
  }
  return s + "]";
}

StrategyVector hurry(int n, int r) {
  if (n < 1) fail(ErrorKind::invalid_strategy, "HURRY needs N >= 1");
  if (r < 0 || r >= n) {
    fail(ErrorKind::invalid_strategy, "HURRY needs 0 <= r <= N-1 (got N=" + std::to_string(n) +
                                          ", r=" + std::to_string(r) + ")");
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 1);
  std::fill(bits.end() - r, bits.end(), std::uint8_t{0});
  return StrategyVector(std::move(bits));
}

}  // namespace rlab
