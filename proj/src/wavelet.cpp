#include "pathret/wavelet.hpp"

#include <bit>

namespace pathret {

void BitVector::finalize() {
    cum_.assign(words_.size() + 1, 0);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        cum_[w + 1] = cum_[w] + static_cast<std::uint32_t>(std::popcount(words_[w]));
    }
}

std::size_t BitVector::rank1(std::size_t i) const {
    std::size_t w = i >> 6, b = i & 63;
    std::size_t r = cum_[w];
    if (b != 0) r += std::popcount(words_[w] & ((std::uint64_t{1} << b) - 1));
    return r;
}

WaveletMatrix::WaveletMatrix(std::span<const std::int32_t> seq, std::int32_t sigma) {
    n_ = seq.size();
    levels_ = 1;
    while ((std::int64_t{1} << levels_) < sigma) ++levels_;

    std::vector<std::int32_t> cur(seq.begin(), seq.end()), next(n_);
    bits_.reserve(static_cast<std::size_t>(levels_));
    zeros_.reserve(static_cast<std::size_t>(levels_));
    for (int level = 0; level < levels_; ++level) {
        int shift = levels_ - 1 - level;
        BitVector bv(n_);
        std::size_t nzeros = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if ((cur[i] >> shift) & 1) {
                bv.set(i);
            } else {
                ++nzeros;
            }
        }
        bv.finalize();
        std::size_t z = 0, o = nzeros;
        for (std::size_t i = 0; i < n_; ++i) {
            if ((cur[i] >> shift) & 1) {
                next[o++] = cur[i];
            } else {
                next[z++] = cur[i];
            }
        }
        std::swap(cur, next);
        bits_.push_back(std::move(bv));
        zeros_.push_back(nzeros);
    }
}

std::int32_t WaveletMatrix::access(std::size_t i) const {
    std::int32_t sym = 0;
    for (int level = 0; level < levels_; ++level) {
        const BitVector& bv = bits_[static_cast<std::size_t>(level)];
        bool b = bv.get(i);
        sym = (sym << 1) | (b ? 1 : 0);
        i = b ? zeros_[static_cast<std::size_t>(level)] + bv.rank1(i) : bv.rank0(i);
    }
    return sym;
}

std::size_t WaveletMatrix::rank(std::int32_t sym, std::size_t i) const {
    std::size_t l = 0, r = i;
    for (int level = 0; level < levels_; ++level) {
        const BitVector& bv = bits_[static_cast<std::size_t>(level)];
        int shift = levels_ - 1 - level;
        if ((sym >> shift) & 1) {
            l = zeros_[static_cast<std::size_t>(level)] + bv.rank1(l);
            r = zeros_[static_cast<std::size_t>(level)] + bv.rank1(r);
        } else {
            l = bv.rank0(l);
            r = bv.rank0(r);
        }
    }
    return r - l;
}

void WaveletMatrix::distinct(std::size_t l, std::size_t r,
                             const std::function<void(std::int32_t, std::size_t)>& fn) const {
    if (l < r) distinct_rec(0, 0, l, r, fn);
}

void WaveletMatrix::distinct_rec(std::size_t level, std::int32_t prefix, std::size_t l,
                                 std::size_t r,
                                 const std::function<void(std::int32_t, std::size_t)>& fn) const {
    if (level == static_cast<std::size_t>(levels_)) {
        fn(prefix, r - l);
        return;
    }
    const BitVector& bv = bits_[level];
    std::size_t l0 = bv.rank0(l), r0 = bv.rank0(r);
    if (l0 < r0) distinct_rec(level + 1, prefix << 1, l0, r0, fn);
    std::size_t l1 = zeros_[level] + bv.rank1(l), r1 = zeros_[level] + bv.rank1(r);
    if (l1 < r1) distinct_rec(level + 1, (prefix << 1) | 1, l1, r1, fn);
}

}  // namespace pathret
