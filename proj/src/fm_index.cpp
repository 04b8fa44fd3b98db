#include "pathret/fm_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pathret/serde.hpp"
#include "pathret/suffix_array.hpp"

namespace pathret {

namespace {
constexpr char kIndexMagic[5] = "PRFM";
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

DocSet::DocSet(std::vector<DocId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

DocSet DocSet::full(std::size_t doc_count) {
    DocSet s;
    s.ids_.resize(doc_count);
    for (std::size_t i = 0; i < doc_count; ++i) s.ids_[i] = static_cast<DocId>(i);
    return s;
}

bool DocSet::contains(DocId d) const {
    return std::binary_search(ids_.begin(), ids_.end(), d);
}

DocSet DocSet::intersect(const DocSet& other) const {
    DocSet out;
    std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                          std::back_inserter(out.ids_));
    return out;
}

std::size_t TokenVecHash::operator()(const std::vector<TokenId>& v) const {
    std::uint64_t h = 1469598103934665603ull;
    for (TokenId t : v) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t));
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

void FMIndex::validate_query(std::span<const TokenId> ngram) {
    for (TokenId t : ngram) {
        if (t < 0) throw std::invalid_argument("negative token id in query");
        if (is_reserved(t)) throw std::invalid_argument("reserved token id in query");
    }
}

FMIndex FMIndex::build(const Corpus& corpus, std::size_t sample_rate) {
    if (corpus.size() == 0) throw DataError("cannot index an empty corpus");
    if (sample_rate == 0) throw std::invalid_argument("sample_rate must be positive");

    FMIndex idx;
    idx.vocab_ = corpus.vocabulary();
    idx.sample_rate_ = sample_rate;
    idx.doc_starts_.reserve(corpus.size() + 1);
    idx.doc_starts_.push_back(0);
    const TokenId sep = idx.sep_symbol();
    for (const Document& doc : corpus.documents()) {
        auto toks = doc.indexed_tokens(corpus);
        idx.text_.insert(idx.text_.end(), toks.begin(), toks.end());
        idx.text_.push_back(sep);
        idx.doc_starts_.push_back(idx.text_.size());
    }
    if (idx.text_.size() == corpus.size()) throw DataError("corpus has zero tokens");

    std::vector<std::int32_t> rev(idx.text_.rbegin(), idx.text_.rend());
    rev.push_back(idx.term_symbol());
    idx.build_structures(std::move(rev));
    return idx;
}

void FMIndex::build_structures(std::vector<std::int32_t> rev) {
    const std::size_t n = rev.size();
    auto sa = build_suffix_array(rev);

    std::vector<std::int32_t> bwt(n);
    std::vector<std::uint64_t> sample_vals;
    BitVector marks(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = sa[i];
        bwt[i] = p == 0 ? rev[n - 1] : rev[p - 1];
        if (p == 0) primary_ = i;
        if (p % sample_rate_ == 0) {
            marks.set(i);
            sample_vals.push_back(p);
        }
    }
    marks.finalize();

    const std::int32_t sigma = term_symbol() + 1;
    occ_cum_.assign(static_cast<std::size_t>(sigma) + 1, 0);
    for (std::int32_t s : bwt) occ_cum_[static_cast<std::size_t>(s) + 1]++;
    for (std::size_t s = 0; s + 1 < occ_cum_.size(); ++s) occ_cum_[s + 1] += occ_cum_[s];

    bwt_ = WaveletMatrix(bwt, sigma);
    sample_marks_ = std::move(marks);
    sample_vals_ = std::move(sample_vals);
}

FMIndex::Range FMIndex::extend(Range r, TokenId tok) const {
    if (r.empty()) return {0, 0};
    if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_.size()) return {0, 0};
    std::size_t base = occ_cum_[static_cast<std::size_t>(tok)];
    return {base + bwt_.rank(tok, r.lo), base + bwt_.rank(tok, r.hi)};
}

FMIndex::Range FMIndex::find(std::span<const TokenId> ngram) const {
    // The BWT is over the reversed stream, so stepping backward through the
    // reversed pattern means stepping forward through the original one.
    Range r = whole();
    for (TokenId t : ngram) {
        r = extend(r, t);
        if (r.empty()) break;
    }
    return r;
}

std::size_t FMIndex::lf(std::size_t row, std::int32_t sym) const {
    return occ_cum_[static_cast<std::size_t>(sym)] + bwt_.rank(sym, row);
}

std::size_t FMIndex::locate(std::size_t row) const {
    std::size_t steps = 0;
    while (!sample_marks_.get(row)) {
        row = lf(row, bwt_.access(row));
        ++steps;
    }
    return sample_vals_[sample_marks_.rank1(row)] + steps;
}

std::size_t FMIndex::count(std::span<const TokenId> ngram) const {
    if (ngram.empty()) throw std::invalid_argument("count requires a non-empty ngram");
    validate_query(ngram);
    return find(ngram).size();
}

std::vector<std::pair<TokenId, std::size_t>> FMIndex::continuations(
    std::span<const TokenId> prefix) const {
    validate_query(prefix);
    Range r = find(prefix);
    std::vector<std::pair<TokenId, std::size_t>> out;
    const TokenId vsize = static_cast<TokenId>(vocab_.size());
    bwt_.distinct(r.lo, r.hi, [&](std::int32_t sym, std::size_t cnt) {
        if (sym < vsize) out.emplace_back(sym, cnt);  // drop separator / terminator
    });
    return out;
}

DocId FMIndex::doc_of_text_pos(std::size_t forward_pos) const {
    auto it = std::upper_bound(doc_starts_.begin(), doc_starts_.end(), forward_pos);
    return static_cast<DocId>(it - doc_starts_.begin() - 1);
}

DocSet FMIndex::match_docs(std::span<const TokenId> ngram) const {
    if (ngram.empty()) throw std::invalid_argument("match_docs requires a non-empty ngram");
    validate_query(ngram);
    Range r = find(ngram);
    std::vector<DocId> docs;
    docs.reserve(r.size());
    const std::size_t n = text_.size();
    for (std::size_t row = r.lo; row < r.hi; ++row) {
        std::size_t rev_pos = locate(row);
        std::size_t fwd_start = n - ngram.size() - rev_pos;
        docs.push_back(doc_of_text_pos(fwd_start));
    }
    return DocSet(std::move(docs));
}

DocSet FMIndex::match_docs(std::span<const TokenId> ngram, MatchCache* cache) const {
    if (cache == nullptr) return match_docs(ngram);
    std::vector<TokenId> key(ngram.begin(), ngram.end());
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    DocSet result = match_docs(ngram);
    cache->emplace(std::move(key), result);
    return result;
}

std::optional<std::vector<TokenId>> FMIndex::continuations_in(std::span<const TokenId> prefix,
                                                              const DocSet& docs,
                                                              std::uint64_t cost_cap) const {
    validate_query(prefix);
    if (docs.empty()) return std::vector<TokenId>{};
    if (docs.size() == doc_count()) {
        std::vector<TokenId> out;
        for (auto& [tok, cnt] : continuations(prefix)) out.push_back(tok);
        return out;
    }

    std::vector<char> seen(vocab_.size(), 0);
    if (prefix.empty()) {
        // Every position continues the empty prefix; the scan cost is the
        // total token count of the subset.
        std::uint64_t cost = 0;
        for (DocId d : docs) cost += doc_tokens(d).size();
        if (cost > cost_cap) return std::nullopt;
        for (DocId d : docs) {
            for (TokenId t : doc_tokens(d)) seen[static_cast<std::size_t>(t)] = 1;
        }
    } else {
        Range r = find(prefix);
        if (r.size() > cost_cap) return std::nullopt;
        const std::size_t n = text_.size();
        const TokenId vsize = static_cast<TokenId>(vocab_.size());
        for (std::size_t row = r.lo; row < r.hi; ++row) {
            // In the reversed index the BWT symbol of a row is exactly the
            // token following this occurrence in the forward stream.
            std::int32_t sym = bwt_.access(row);
            if (sym >= vsize) continue;  // occurrence ends at a document boundary
            std::size_t rev_pos = locate(row);
            DocId d = doc_of_text_pos(n - prefix.size() - rev_pos);
            if (docs.contains(d)) seen[static_cast<std::size_t>(sym)] = 1;
        }
    }
    std::vector<TokenId> out;
    for (std::size_t t = 0; t < seen.size(); ++t) {
        if (seen[t]) out.push_back(static_cast<TokenId>(t));
    }
    return out;
}

std::size_t FMIndex::token_count(TokenId t) const {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_.size()) return 0;
    return occ_cum_[static_cast<std::size_t>(t) + 1] - occ_cum_[static_cast<std::size_t>(t)];
}

std::span<const TokenId> FMIndex::doc_tokens(DocId d) const {
    if (d + 1 >= doc_starts_.size()) throw std::invalid_argument("doc id out of range");
    std::size_t lo = doc_starts_[d], hi = doc_starts_[d + 1] - 1;  // exclude separator
    return std::span<const TokenId>(text_.data() + lo, hi - lo);
}

void FMIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write index file: " + path);
    serde::write_magic(out, kIndexMagic, kIndexVersion);
    serde::write_vocabulary(out, vocab_);
    serde::write_u64(out, doc_starts_.size());
    for (std::size_t s : doc_starts_) serde::write_u64(out, s);
    serde::write_u64(out, sample_rate_);
    const std::size_t n = bwt_.size();
    serde::write_u64(out, n);
    for (std::size_t i = 0; i < n; ++i) serde::write_i32(out, bwt_.access(i));
    serde::write_u64(out, primary_);
    serde::write_u64(out, sample_vals_.size());
    std::size_t next_sample = 0;
    for (std::size_t row = 0; row < n; ++row) {
        if (sample_marks_.get(row)) {
            serde::write_u64(out, row);
            serde::write_u64(out, sample_vals_[next_sample++]);
        }
    }
    if (!out) throw DataError("write failure on index file: " + path);
}

FMIndex FMIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index file: " + path);
    serde::expect_magic(in, kIndexMagic, kIndexVersion);

    FMIndex idx;
    idx.vocab_ = serde::read_vocabulary(in);
    std::uint64_t nstarts = serde::read_u64(in);
    idx.doc_starts_.resize(nstarts);
    for (auto& s : idx.doc_starts_) s = serde::read_u64(in);
    idx.sample_rate_ = serde::read_u64(in);

    std::uint64_t n = serde::read_u64(in);
    std::vector<std::int32_t> bwt(n);
    for (auto& s : bwt) s = serde::read_i32(in);
    idx.primary_ = serde::read_u64(in);

    const std::int32_t sigma = idx.term_symbol() + 1;
    idx.occ_cum_.assign(static_cast<std::size_t>(sigma) + 1, 0);
    for (std::int32_t s : bwt) {
        if (s < 0 || s >= sigma) throw DataError("corrupt index: symbol out of range");
        idx.occ_cum_[static_cast<std::size_t>(s) + 1]++;
    }
    for (std::size_t s = 0; s + 1 < idx.occ_cum_.size(); ++s) idx.occ_cum_[s + 1] += idx.occ_cum_[s];
    idx.bwt_ = WaveletMatrix(bwt, sigma);

    std::uint64_t nsamples = serde::read_u64(in);
    BitVector marks(n);
    idx.sample_vals_.resize(nsamples);
    for (std::uint64_t i = 0; i < nsamples; ++i) {
        std::uint64_t row = serde::read_u64(in);
        if (row >= n) throw DataError("corrupt index: sample row out of range");
        marks.set(row);
        idx.sample_vals_[i] = serde::read_u64(in);
    }
    marks.finalize();
    idx.sample_marks_ = std::move(marks);

    // Recover the token stream by inverting the BWT; this also validates the
    // transform end to end.
    if (n == 0 || idx.doc_starts_.empty()) throw DataError("corrupt index: empty payload");
    std::vector<std::int32_t> rev(n);
    std::size_t row = idx.primary_;
    for (std::size_t k = 0; k < n; ++k) {
        std::int32_t sym = idx.bwt_.access(row);
        rev[n - 1 - k] = sym;
        row = idx.lf(row, sym);
    }
    if (row != idx.primary_ || rev[n - 1] != idx.term_symbol()) {
        throw DataError("corrupt index: BWT inversion failed");
    }
    idx.text_.assign(rev.rbegin() + 1, rev.rend());
    if (idx.doc_starts_.back() != idx.text_.size()) {
        throw DataError("corrupt index: document offsets disagree with text");
    }
    return idx;
}

}  // namespace pathret
