#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rlab {

/// Binary reuse schedule over N sampling steps: 1 = compute the attention
/// maps at that step, 0 = reuse the cached ones. Step 1 always computes.
class StrategyVector {
 public:
  StrategyVector() = default;
  /// Throws ErrorKind::invalid_strategy if empty or bits[0] == 0.
  explicit StrategyVector(std::vector<std::uint8_t> bits);

  static StrategyVector all_ones(int n);

  /// Accepts "1101..." or the bracketed "[1,1,0,1]" form (spaces allowed).
  static StrategyVector parse(std::string_view literal);

  int size() const noexcept { return static_cast<int>(bits_.size()); }
  int reuse_count() const noexcept;    // r
  int compute_count() const noexcept;  // popcount
  /// 1-based step index.
  bool computes_at(int step) const { return bits_.at(static_cast<std::size_t>(step - 1)) != 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  std::string str() const;        // "110100"
  std::string bracketed() const;  // "[1,1,0,1,0,0]"

  friend bool operator==(const StrategyVector&, const StrategyVector&) = default;
  friend auto operator<=>(const StrategyVector& a, const StrategyVector& b) { return a.bits_ <=> b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

/// N - r compute steps followed by r reuse steps.
StrategyVector hurry(int n, int r);

}  // namespace rlab
