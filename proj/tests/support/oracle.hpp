#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/fm_index.hpp"
#include "pathret/partitioner.hpp"

// Naive linear-scan reference for every index query. Lives in test code and
// never touches the FM-index internals it is used to check.

namespace pathret::oracle {

class ScanOracle {
public:
    explicit ScanOracle(const Corpus& corpus);

    std::size_t count(std::span<const TokenId> ngram) const;
    std::vector<std::pair<TokenId, std::size_t>> continuations(
        std::span<const TokenId> prefix) const;
    DocSet match_docs(std::span<const TokenId> ngram) const;
    std::optional<std::vector<TokenId>> continuations_in(std::span<const TokenId> prefix,
                                                         const DocSet& docs,
                                                         std::uint64_t cost_cap) const;
    DocSet partition(const SearchPath& path) const;

    std::size_t doc_count() const { return docs_.size(); }
    const std::vector<std::vector<TokenId>>& doc_streams() const { return docs_; }

private:
    std::vector<std::vector<TokenId>> docs_;  // per-document indexed streams
    std::size_t vocab_size_;
};

}  // namespace pathret::oracle
