#include "saomre/bitnet.hpp"

namespace saomre {

BitNetwork::BitNetwork(const Network& x)
    : n_(x.size()),
      words_((x.size() + 63) / 64),
      rows_(n_ * words_, 0),
      cols_(n_ * words_, 0),
      out_(n_, 0),
      in_(n_, 0) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (x.tie(i, j)) toggle(i, j);
}

void BitNetwork::toggle(std::size_t i, std::size_t j) {
  const std::uint64_t rbit = std::uint64_t{1} << (j % 64);
  const std::uint64_t cbit = std::uint64_t{1} << (i % 64);
  std::uint64_t& r = rows_[i * words_ + j / 64];
  const int d = (r & rbit) ? -1 : 1;
  r ^= rbit;
  cols_[j * words_ + i / 64] ^= cbit;
  out_[i] += d;
  in_[j] += d;
}

Network BitNetwork::to_network() const {
  Network x(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (tie(i, j)) x.set_tie(i, j, true);
  return x;
}

}  // namespace saomre
