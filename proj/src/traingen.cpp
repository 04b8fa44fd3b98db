#include "pathret/traingen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

namespace pathret {

namespace {

bool is_punct_token(const std::string& s) {
    return s.size() == 1 && std::ispunct(static_cast<unsigned char>(s[0]));
}

bool contains_subseq(std::span<const TokenId> hay, std::span<const TokenId> needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
            return true;
        }
    }
    return false;
}

std::optional<std::size_t> find_subseq(std::span<const TokenId> hay,
                                       std::span<const TokenId> needle) {
    if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
    for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
            return i;
        }
    }
    return std::nullopt;
}

// Per-position "capitalized mid-sentence" flags for a document's indexed
// stream; the entity proxy for keywords that contain names.
std::vector<bool> entity_flags(const Document& doc, const Corpus& corpus) {
    auto mark = [](const std::string& raw, bool sentence_start_at_0) {
        std::vector<bool> flags;
        auto words = tokenize_words_with_case(raw);
        bool at_sentence_start = sentence_start_at_0;
        for (const auto& [w, capitalized] : words) {
            flags.push_back(capitalized && !at_sentence_start);
            at_sentence_start = (w == "." || w == "!" || w == "?");
        }
        return flags;
    };
    std::vector<bool> title_flags = mark(doc.raw_title, true);
    std::vector<bool> body_flags = mark(doc.raw_body, true);
    std::vector<bool> out;
    if (!doc.title.empty()) {
        out = title_flags;
        if (corpus.vocabulary().lookup(".")) out.push_back(false);  // title/body joiner
    }
    out.insert(out.end(), body_flags.begin(), body_flags.end());
    return out;
}

double uniform_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// surface-level overlap: either string contains the other
bool surfaces_overlap(const std::string& a, const std::string& b) {
    return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the combined value
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::size_t TraingenConfig::max_count(std::size_t doc_count) const {
    double cap = std::ceil(max_count_frac * static_cast<double>(doc_count));
    return std::max<std::size_t>(1, static_cast<std::size_t>(cap));
}

StopWords::StopWords() {
    static const char* kList[] = {
        "a",    "an",    "and",   "are",  "as",   "at",    "be",    "but",   "by",   "for",
        "from", "had",   "has",   "have", "he",   "her",   "his",   "i",     "if",   "in",
        "into", "is",    "it",    "its",  "may",  "not",   "of",    "on",    "or",   "our",
        "she",  "so",    "that",  "the",  "their", "then", "there", "these", "they", "this",
        "to",   "was",   "we",    "were", "what",  "when", "where", "which", "who",  "will",
        "with", "you"};
    for (const char* w : kList) words_.insert(w);
}

bool StopWords::contains(const std::string& word) const {
    return words_.count(word) > 0 || is_punct_token(word);
}

namespace {

std::vector<TokenId> content_tokens(std::span<const TokenId> toks, const StopWords& stops,
                                    const Vocabulary& vocab) {
    std::vector<TokenId> out;
    for (TokenId t : toks) {
        if (!is_reserved(t) && !stops.contains(vocab.surface(t))) out.push_back(t);
    }
    return out;
}

}  // namespace

double rouge1_f1(std::span<const TokenId> a, std::span<const TokenId> b, const StopWords& stops,
                 const Vocabulary& vocab) {
    std::vector<TokenId> ca = content_tokens(a, stops, vocab);
    std::vector<TokenId> cb = content_tokens(b, stops, vocab);
    if (ca.empty() || cb.empty()) return 0.0;
    std::map<TokenId, std::size_t> count_a, count_b;
    for (TokenId t : ca) count_a[t]++;
    for (TokenId t : cb) count_b[t]++;
    std::size_t overlap = 0;
    for (const auto& [t, n] : count_a) {
        auto it = count_b.find(t);
        if (it != count_b.end()) overlap += std::min(n, it->second);
    }
    if (overlap == 0) return 0.0;
    double p = static_cast<double>(overlap) / static_cast<double>(ca.size());
    double r = static_cast<double>(overlap) / static_cast<double>(cb.size());
    return 2.0 * p * r / (p + r);
}

double score_candidate(KeywordCandidate& c, std::span<const TokenId> query_tokens,
                       const StopWords& stops, const Vocabulary& vocab,
                       const TraingenConfig& config) {
    c.rouge1 = rouge1_f1(c.keyword.tokens, query_tokens, stops, vocab);
    c.final_score = c.rouge1 + config.w_entity * (c.entity_award ? 1.0 : 0.0) -
                    config.w_freq * std::log1p(static_cast<double>(c.corpus_count)) +
                    config.w_title * (c.is_title ? 1.0 : 0.0) +
                    config.w_answer * (c.contains_answer ? 1.0 : 0.0);
    return c.final_score;
}

std::vector<KeywordCandidate> extract_candidates(const Corpus& corpus, const FMIndex& index,
                                                 const Document& gold,
                                                 std::span<const TokenId> query_tokens,
                                                 std::span<const TokenId> answer_tokens,
                                                 const StopWords& stops,
                                                 const TraingenConfig& config,
                                                 MatchCache* cache) {
    (void)cache;
    const Vocabulary& vocab = corpus.vocabulary();
    std::vector<TokenId> toks = gold.indexed_tokens(corpus);
    std::vector<bool> entities = entity_flags(gold, corpus);

    // distinct n-grams with OR-aggregated entity flags
    std::unordered_map<std::vector<TokenId>, bool, TokenVecHash> grams;
    for (std::size_t start = 0; start < toks.size(); ++start) {
        for (std::size_t len = 1; len <= config.max_keyword_len && start + len <= toks.size();
             ++len) {
            std::vector<TokenId> g(toks.begin() + static_cast<std::ptrdiff_t>(start),
                                   toks.begin() + static_cast<std::ptrdiff_t>(start + len));
            bool ent = false;
            for (std::size_t i = start; i < start + len && i < entities.size(); ++i) {
                ent = ent || entities[i];
            }
            auto [it, inserted] = grams.emplace(std::move(g), ent);
            if (!inserted) it->second = it->second || ent;
        }
    }

    const std::size_t max_cnt = config.max_count(corpus.size());
    std::vector<KeywordCandidate> out;
    for (const auto& [g, ent] : grams) {
        const std::string& first = vocab.surface(g.front());
        const std::string& last = vocab.surface(g.back());
        if (stops.contains(first) || stops.contains(last)) continue;
        std::size_t cnt = index.count(g);
        if (cnt < config.min_count || cnt > max_cnt) continue;
        KeywordCandidate c;
        c.keyword = Keyword::from_tokens(g, vocab);
        c.corpus_count = cnt;
        c.entity_award = ent;
        c.is_title = !gold.title.empty() && g == gold.title;
        c.contains_answer = contains_subseq(g, answer_tokens);
        score_candidate(c, query_tokens, stops, vocab, config);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const KeywordCandidate& a, const KeywordCandidate& b) {
        if (a.final_score != b.final_score) return a.final_score > b.final_score;
        return a.keyword.tokens < b.keyword.tokens;
    });
    return out;
}

TrainingExample sample_path(const Corpus& corpus, const FMIndex& index,
                            const std::string& question, const Document& gold,
                            const Keyword& answer,
                            const std::vector<KeywordCandidate>& candidates,
                            const TraingenConfig& config, std::uint64_t rng_seed,
                            MatchCache* cache) {
    const Vocabulary& vocab = corpus.vocabulary();
    std::vector<TokenId> gold_toks = gold.indexed_tokens(corpus);
    for (TokenId t : answer.tokens) {
        if (is_reserved(t)) throw DataError("answer \"" + answer.surface + "\" not in gold document");
    }
    auto answer_pos = find_subseq(gold_toks, answer.tokens);
    if (!answer_pos) {
        throw DataError("answer \"" + answer.surface + "\" not in gold document " +
                        gold.external_id);
    }

    std::mt19937_64 rng(rng_seed);
    const bool title_usable = !gold.title.empty();
    if (!title_usable && candidates.empty()) {
        throw DataError("no usable first keyword for document " + gold.external_id);
    }

    SearchPath path;
    double title_draw = uniform_draw(rng);
    if (title_usable && (candidates.empty() || title_draw < config.title_first_prob)) {
        path.keywords.push_back(Keyword::from_tokens(gold.title, vocab));
    } else {
        path.keywords.push_back(candidates.front().keyword);
    }

    DocSet docs = index.match_docs(path.keywords.front().tokens, cache);
    while (docs.size() >= config.partition_target && path.keywords.size() < config.max_path_len) {
        std::vector<const KeywordCandidate*> eligible;
        for (const KeywordCandidate& c : candidates) {
            bool overlaps = false;
            for (const Keyword& k : path.keywords) {
                if (surfaces_overlap(c.keyword.surface, k.surface)) {
                    overlaps = true;
                    break;
                }
            }
            if (!overlaps) eligible.push_back(&c);
        }
        if (eligible.empty()) break;

        double min_score = eligible.front()->final_score;
        for (const auto* c : eligible) min_score = std::min(min_score, c->final_score);
        std::vector<double> weights;
        double total = 0.0;
        for (const auto* c : eligible) {
            double w = c->final_score - min_score + 1e-6;
            weights.push_back(w);
            total += w;
        }
        double u = uniform_draw(rng) * total;
        std::size_t pick = 0;
        for (; pick + 1 < weights.size(); ++pick) {
            if (u < weights[pick]) break;
            u -= weights[pick];
        }
        path.keywords.push_back(eligible[pick]->keyword);
        docs = filter_docs(index, docs, path.keywords.back(), cache);
    }

    TrainingExample ex;
    ex.question = question;
    ex.gold_doc_id = gold.doc_id;
    ex.matched_docs = docs.size();
    ex.oversized_partition = docs.size() >= config.partition_target;

    Keyword final_answer = answer;
    if (uniform_draw(rng) < config.punct_augment_prob) {
        // widen to surrounding punctuation as it appears in the gold document
        std::size_t lo = *answer_pos, hi = *answer_pos + answer.tokens.size();
        while (lo > 0 && is_punct_token(vocab.surface(gold_toks[lo - 1]))) --lo;
        while (hi < gold_toks.size() && is_punct_token(vocab.surface(gold_toks[hi]))) ++hi;
        if (lo != *answer_pos || hi != *answer_pos + answer.tokens.size()) {
            std::vector<TokenId> widened(gold_toks.begin() + static_cast<std::ptrdiff_t>(lo),
                                         gold_toks.begin() + static_cast<std::ptrdiff_t>(hi));
            final_answer = Keyword::from_tokens(std::move(widened), vocab);
        }
    }
    path.answer = final_answer;

    ex.path = std::move(path);
    ex.input = serialize_input(question);
    ex.target = serialize_target(ex.path, config);
    return ex;
}

std::string serialize_input(const std::string& question) {
    return "Generate keywords for: " + question + "?";
}

std::string serialize_target(const SearchPath& path, const TraingenConfig& config) {
    std::string out;
    for (const Keyword& k : path.keywords) {
        out += config.kw_sep;
        out += ' ';
        out += k.surface;
        out += ' ';
    }
    if (path.answer) {
        out += config.kw_sep;
        out += ' ';
        out += config.ans_sep;
        out += ' ';
        out += path.answer->surface;
    } else if (!out.empty()) {
        out.pop_back();  // drop trailing space
    }
    return out;
}

namespace {

template <typename AddWord>
void walk_target(const std::string& target, const TraingenConfig& config,
                 const AddWord& on_word, const std::function<void(bool)>& on_sep) {
    for (const std::string& w : split_ws(target)) {
        if (w == config.kw_sep) {
            on_sep(false);
        } else if (w == config.ans_sep) {
            on_sep(true);
        } else {
            on_word(w);
        }
    }
}

}  // namespace

SearchPath parse_target(const std::string& target, const Vocabulary& vocab,
                        const TraingenConfig& config) {
    SearchPath path;
    std::string segment;
    bool answer_segment = false;
    auto close = [&] {
        if (segment.empty()) return;
        Keyword k = Keyword::from_tokens(tokenize_lookup(segment, vocab), vocab);
        segment.clear();
        if (answer_segment && !path.answer) {
            path.answer = std::move(k);
        } else {
            path.keywords.push_back(std::move(k));
        }
    };
    walk_target(
        target, config,
        [&](const std::string& w) {
            if (!segment.empty()) segment += ' ';
            segment += w;
        },
        [&](bool is_answer) {
            close();
            if (is_answer) answer_segment = true;
        });
    close();
    return path;
}

std::vector<TokenId> encode_target(const std::string& target, Vocabulary& vocab,
                                   const TraingenConfig& config) {
    std::vector<TokenId> out;
    walk_target(
        target, config, [&](const std::string& w) { out.push_back(vocab.add(w)); },
        [&](bool is_answer) { out.push_back(is_answer ? kAnsSep : kKwSep); });
    return out;
}

std::vector<TrainingExample> generate_for_query(const Corpus& corpus, const FMIndex& index,
                                                const QaRecord& qa, const TraingenConfig& config,
                                                std::uint64_t global_seed,
                                                std::size_t query_index) {
    if (!qa.gold_doc_id || !qa.gold_answer) {
        throw DataError("traingen requires gold_doc_id and gold_answer for question \"" +
                        qa.question + "\"");
    }
    auto doc_id = corpus.resolve_external_id(*qa.gold_doc_id);
    if (!doc_id) throw DataError("unknown gold_doc_id \"" + *qa.gold_doc_id + "\"");
    const Document& gold = corpus.doc(*doc_id);
    const Vocabulary& vocab = corpus.vocabulary();

    std::vector<TokenId> query_tokens = tokenize_lookup(qa.question, vocab);
    std::vector<TokenId> answer_tokens = tokenize_lookup(*qa.gold_answer, vocab);
    Keyword answer;
    answer.tokens = answer_tokens;
    answer.surface = "";
    for (const std::string& w : tokenize_words(*qa.gold_answer)) {
        if (!answer.surface.empty()) answer.surface += ' ';
        answer.surface += w;
    }

    StopWords stops;
    MatchCache cache;
    auto candidates =
        extract_candidates(corpus, index, gold, query_tokens, answer_tokens, stops, config, &cache);

    std::mt19937_64 rng(mix_seed(global_seed, query_index));
    std::vector<TrainingExample> out;
    out.reserve(config.paths_per_query);
    for (std::size_t p = 0; p < config.paths_per_query; ++p) {
        out.push_back(
            sample_path(corpus, index, qa.question, gold, answer, candidates, config, rng(), &cache));
    }
    return out;
}

}  // namespace pathret
