#include "pathret/partitioner.hpp"

namespace pathret {

Keyword Keyword::from_tokens(std::vector<TokenId> toks, const Vocabulary& vocab) {
    Keyword k;
    k.surface = detokenize(toks, vocab);
    k.tokens = std::move(toks);
    return k;
}

std::vector<Keyword> SearchPath::all_segments() const {
    std::vector<Keyword> out = keywords;
    if (answer) out.push_back(*answer);
    return out;
}

DocSet filter_docs(const FMIndex& index, const DocSet& docs, const Keyword& keyword,
                   MatchCache* cache) {
    if (docs.empty()) return docs;
    return docs.intersect(index.match_docs(keyword.tokens, cache));
}

DocSet partition(const FMIndex& index, const SearchPath& path, MatchCache* cache) {
    DocSet docs = DocSet::full(index.doc_count());
    for (const Keyword& k : path.all_segments()) {
        docs = filter_docs(index, docs, k, cache);
        if (docs.empty()) break;  // monotone: later keywords cannot revive it
    }
    return docs;
}

SearchPath parse_emitted(std::span<const TokenId> emitted, const Vocabulary& vocab) {
    SearchPath path;
    std::vector<TokenId> segment;
    bool answer_segment = false;
    auto close = [&] {
        if (segment.empty()) return;
        Keyword k = Keyword::from_tokens(std::move(segment), vocab);
        segment = {};
        if (answer_segment && !path.answer) {
            path.answer = std::move(k);
        } else {
            path.keywords.push_back(std::move(k));
        }
    };
    for (TokenId t : emitted) {
        if (t == kKwSep) {
            close();
        } else if (t == kAnsSep) {
            close();
            answer_segment = true;
        } else if (t == kEos) {
            break;
        } else if (t == kPad) {
            continue;
        } else {
            segment.push_back(t);
        }
    }
    close();
    return path;
}

}  // namespace pathret
