#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctm/errors.hpp"

namespace ctm {

/// Literal ids: k < K is feature x_k, K + k is its negation.
using LiteralId = std::uint32_t;
using Label = std::uint32_t;

/// A boolean feature vector stored as its sorted set of true indices.
struct BoolSample {
  std::vector<std::uint32_t> features;
  Label label = 0;

  friend bool operator==(const BoolSample&, const BoolSample&) = default;
};

/// Dense truth table over all 2K literals of one input.
class InputView {
 public:
  InputView() = default;

  InputView(std::span<const std::uint32_t> true_features, std::size_t n_features)
      : n_features_(n_features), truth_(2 * n_features, 0) {
    std::fill(truth_.begin() + static_cast<std::ptrdiff_t>(n_features), truth_.end(), 1);
    for (auto f : true_features) {
      if (f >= n_features) {
        throw ContractViolation("feature index " + std::to_string(f) + " >= width " +
                                std::to_string(n_features));
      }
      truth_[f] = 1;
      truth_[n_features + f] = 0;
    }
  }

  InputView(const BoolSample& sample, std::size_t n_features)
      : InputView(std::span<const std::uint32_t>(sample.features), n_features) {}

  /// Builds a view from a dense bit vector.
  static InputView from_bits(const std::vector<bool>& bits) {
    std::vector<std::uint32_t> on;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (bits[k]) on.push_back(static_cast<std::uint32_t>(k));
    }
    return InputView(on, bits.size());
  }

  std::size_t n_features() const { return n_features_; }
  std::size_t n_literals() const { return truth_.size(); }

  bool literal(LiteralId id) const { return truth_[id] != 0; }

  bool literal_checked(LiteralId id) const {
    if (id >= truth_.size()) {
      throw ContractViolation("literal " + std::to_string(id) + " out of range for " +
                              std::to_string(n_features_) + " features");
    }
    return truth_[id] != 0;
  }

 private:
  std::size_t n_features_ = 0;
  std::vector<std::uint8_t> truth_;
};

}  // namespace ctm
