#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sas {

// Dense square binary matrix, one bit per entry, rows padded to whole 64-bit
// words. A graph with 7.5e4 nodes fits in ~700 MB.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;

  explicit AdjacencyMatrix(std::size_t n)
      : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return words_; }

  // Bytes a matrix of n nodes occupies.
  static std::size_t storage_bytes(std::size_t n) noexcept {
    return n * ((n + 63) / 64) * sizeof(std::uint64_t);
  }

  bool operator()(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }

  void set(std::size_t i, std::size_t j, bool value = true) {
    check_index(i, j);
    std::uint64_t& word = bits_[i * words_ + j / 64];
    const std::uint64_t mask = std::uint64_t{1} << (j % 64);
    word = value ? (word | mask) : (word & ~mask);
  }

  std::span<const std::uint64_t> row_words(std::size_t i) const {
    return {bits_.data() + i * words_, words_};
  }

  std::span<std::uint64_t> row_words(std::size_t i) {
    return {bits_.data() + i * words_, words_};
  }

  std::size_t row_sum(std::size_t i) const {
    std::size_t total = 0;
    for (const std::uint64_t w : row_words(i)) total += std::popcount(w);
    return total;
  }

  // Number of one-entries (each undirected edge counts twice).
  std::size_t ones() const {
    std::size_t total = 0;
    for (const std::uint64_t w : bits_) total += std::popcount(w);
    return total;
  }

  // Calls f(j) for every column j with a one in row i, in increasing order.
  template <typename F>
  void for_each_in_row(std::size_t i, F&& f) const {
    const auto row = row_words(i);
    for (std::size_t w = 0; w < row.size(); ++w) {
      std::uint64_t word = row[w];
      while (word != 0) {
        const int bit = std::countr_zero(word);
        f(w * 64 + static_cast<std::size_t>(bit));
        word &= word - 1;
      }
    }
  }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
      bool ok = true;
      for_each_in_row(i, [&](std::size_t j) { ok = ok && (*this)(j, i); });
      if (!ok) return false;
    }
    return true;
  }

  bool diagonal_is_zero() const {
    for (std::size_t i = 0; i < n_; ++i)
      if ((*this)(i, i)) return false;
    return true;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                                  static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for_each_in_row(i, [&](std::size_t j) {
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      });
    return dense;
  }

  // Entries > 0.5 become ones.
  static AdjacencyMatrix from_dense(const Eigen::MatrixXd& dense) {
    if (dense.rows() != dense.cols())
      throw std::invalid_argument("adjacency matrix must be square");
    AdjacencyMatrix g(static_cast<std::size_t>(dense.rows()));
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      for (Eigen::Index j = 0; j < dense.cols(); ++j)
        if (dense(i, j) > 0.5) g.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return g;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  void check_index(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("adjacency index out of range");
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

}  // namespace sas
