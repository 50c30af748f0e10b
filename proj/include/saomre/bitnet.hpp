#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "saomre/network.hpp"

namespace saomre {

/// Mutable working copy of a Network used inside simulations: rows and columns
/// stored as bitsets so that two-path counts are popcounts.
class BitNetwork {
 public:
  BitNetwork() = default;
  explicit BitNetwork(const Network& x);

  std::size_t size() const { return n_; }
  bool tie(std::size_t i, std::size_t j) const {
    return (rows_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }
  int out_degree(std::size_t i) const { return out_[i]; }
  int in_degree(std::size_t j) const { return in_[j]; }

  void toggle(std::size_t i, std::size_t j);

  /// #{h : x_ih = 1 and x_hj = 1}
  int two_paths(std::size_t i, std::size_t j) const {
    return and_count(&rows_[i * words_], &cols_[j * words_]);
  }
  /// #{h : x_ih = 1 and x_jh = 1}
  int shared_out(std::size_t i, std::size_t j) const {
    return and_count(&rows_[i * words_], &rows_[j * words_]);
  }

  Network to_network() const;

 private:
  int and_count(const std::uint64_t* a, const std::uint64_t* b) const {
    int c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += std::popcount(a[w] & b[w]);
    return c;
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> rows_;
  std::vector<std::uint64_t> cols_;
  std::vector<int> out_;
  std::vector<int> in_;
};

}  // namespace saomre
