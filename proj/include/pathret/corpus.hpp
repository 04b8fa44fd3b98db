#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathret {

using TokenId = std::int32_t;
using DocId = std::uint32_t;

// Reserved token ids. Never produced by tokenizing raw text.
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kKwSep = 2;
inline constexpr TokenId kAnsSep = 3;
inline constexpr TokenId kFirstRegularToken = 4;

inline constexpr std::string_view kKwSepSurface = "<extra_id_0>";
inline constexpr std::string_view kAnsSepSurface = "<extra_id_1>";

inline bool is_reserved(TokenId id) { return id >= 0 && id < kFirstRegularToken; }

/// Raised for malformed input data (files, records, ids).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Bijective surface-form <-> token-id mapping. Ids 0..3 are reserved and
/// preseeded; regular ids are assigned densely in first-seen order.
class Vocabulary {
public:
    Vocabulary();

    // Returns the id for `surface`, assigning a fresh one if unseen.
    TokenId add(std::string_view surface);
    std::optional<TokenId> lookup(std::string_view surface) const;
    const std::string& surface(TokenId id) const;
    std::size_t size() const { return surfaces_.size(); }

    bool operator==(const Vocabulary& other) const { return surfaces_ == other.surfaces_; }

    // True when `other` assigns the same ids to every surface this vocabulary
    // knows (i.e. `other` extends this one).
    bool is_prefix_of(const Vocabulary& other) const;

private:
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, TokenId> ids_;
};

// Word-level tokenization: lowercase, split on whitespace, punctuation marks
// become their own tokens. Pure string splitting; id assignment is the
// vocabulary's job.
std::vector<std::string> tokenize_words(std::string_view text);

// tokenize_words plus a per-token flag: true when the source word started
// with an uppercase letter. Used by the entity heuristic in traingen.
std::vector<std::pair<std::string, bool>> tokenize_words_with_case(std::string_view text);

// Tokenize and assign ids, extending `vocab` with unseen words.
std::vector<TokenId> tokenize_extend(std::string_view text, Vocabulary& vocab);

// Tokenize against a frozen vocabulary; unseen words map to kPad (they can
// appear only in scoring contexts, never in emitted or indexed text).
std::vector<TokenId> tokenize_lookup(std::string_view text, const Vocabulary& vocab);

// Surface forms joined by single spaces. Throws on reserved or unknown ids.
std::string detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab);

struct Document {
    DocId doc_id = 0;
    std::string external_id;
    std::string raw_title;
    std::string raw_body;
    std::vector<TokenId> title;
    std::vector<TokenId> body;

    // Token stream the index sees: title, a period, then the body. Title
    // keywords have to be findable in the index for title-first paths.
    std::vector<TokenId> indexed_tokens(const class Corpus& corpus) const;
};

class Corpus {
public:
    const std::vector<Document>& documents() const { return docs_; }
    const Document& doc(DocId id) const { return docs_.at(id); }
    std::size_t size() const { return docs_.size(); }
    const Vocabulary& vocabulary() const { return vocab_; }
    std::optional<DocId> resolve_external_id(std::string_view ext) const;

    friend Corpus ingest(std::istream& in);

private:
    std::vector<Document> docs_;
    Vocabulary vocab_;
    std::unordered_map<std::string, DocId> ext_ids_;
};

// Reads line-delimited JSON records with fields id/title/text. Doc ids are
// dense in input order. Duplicate ids, empty text and malformed records are
// DataErrors naming the offending line.
Corpus ingest(std::istream& in);
Corpus ingest_file(const std::string& path);

struct QaRecord {
    std::string question;
    std::vector<std::string> answers;
    std::optional<std::string> gold_doc_id;  // external id
    std::optional<std::string> gold_answer;
};

std::vector<QaRecord> read_qa_file(const std::string& path);

}  // namespace pathret
