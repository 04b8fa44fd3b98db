#include "pathret/suffix_array.hpp"

#include <algorithm>
#include <numeric>

namespace pathret {

std::vector<std::uint32_t> build_suffix_array(std::span<const std::int32_t> text) {
    const std::size_t n = text.size();
    std::vector<std::uint32_t> sa(n);
    std::iota(sa.begin(), sa.end(), 0u);
    if (n <= 1) return sa;

    std::vector<std::int64_t> rank(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) rank[i] = text[i];

    for (std::size_t k = 1;; k *= 2) {
        auto key = [&](std::uint32_t i) {
            std::int64_t second = (i + k < n) ? rank[i + k] : -1;
            return std::pair<std::int64_t, std::int64_t>(rank[i], second);
        };
        std::sort(sa.begin(), sa.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
        tmp[sa[0]] = 0;
        for (std::size_t i = 1; i < n; ++i) {
            tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
        }
        rank = tmp;
        if (rank[sa[n - 1]] == static_cast<std::int64_t>(n - 1)) break;
    }
    return sa;
}

}  // namespace pathret
