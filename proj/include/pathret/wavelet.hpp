#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pathret {

/// Plain bitvector with O(1) rank via per-word cumulative counts.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    std::size_t size() const { return n_; }

    // Call once after all set() calls; rank queries are invalid before.
    void finalize();

    // Number of 1-bits in [0, i).
    std::size_t rank1(std::size_t i) const;
    std::size_t rank0(std::size_t i) const { return i - rank1(i); }
    std::size_t ones() const { return n_ == 0 ? 0 : rank1(n_); }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<std::uint32_t> cum_;  // ones before each word
};

/// Wavelet matrix over symbols [0, sigma): access, rank and distinct-symbol
/// enumeration over an arbitrary range, all O(log sigma) per level.
class WaveletMatrix {
public:
    WaveletMatrix() = default;
    WaveletMatrix(std::span<const std::int32_t> seq, std::int32_t sigma);

    std::size_t size() const { return n_; }

    std::int32_t access(std::size_t i) const;

    // Occurrences of `sym` in [0, i).
    std::size_t rank(std::int32_t sym, std::size_t i) const;

    // Enumerates (symbol, count) for every distinct symbol in [l, r),
    // in ascending symbol order.
    void distinct(std::size_t l, std::size_t r,
                  const std::function<void(std::int32_t, std::size_t)>& fn) const;

private:
    void distinct_rec(std::size_t level, std::int32_t prefix, std::size_t l, std::size_t r,
                      const std::function<void(std::int32_t, std::size_t)>& fn) const;

    std::size_t n_ = 0;
    int levels_ = 0;
    std::vector<BitVector> bits_;
    std::vector<std::size_t> zeros_;  // zero count per level
};

}  // namespace pathret
