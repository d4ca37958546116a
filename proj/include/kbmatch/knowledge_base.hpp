#pragma once

// Entity descriptions and knowledge bases.
//
// A KnowledgeBase is built once through KnowledgeBaseBuilder and is immutable
// afterwards, so it can be read concurrently without synchronization.
// Entities, attributes and tokens are numbered in lexicographic order of their
// strings. Every tie-break in the library that falls back on an index
// therefore falls back on the string, which makes results independent of the
// order in which triples were read.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbmatch/text.hpp"

namespace kbmatch {

/// Which of the two knowledge bases a description belongs to.
enum class Side : std::uint8_t { kFirst = 0, kSecond = 1 };

constexpr Side other(Side s) noexcept {
  return s == Side::kFirst ? Side::kSecond : Side::kFirst;
}

using EntityIndex = std::uint32_t;
using AttributeId = std::uint32_t;
using TokenId = std::uint32_t;

struct Literal {
  AttributeId attribute;
  std::string value;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct Relation {
  AttributeId attribute;
  EntityIndex target;

  friend bool operator==(const Relation&, const Relation&) = default;
  friend auto operator<=>(const Relation&, const Relation&) = default;
};

/// A URI-identified set of attribute-value pairs. Values that name another
/// description of the same knowledge base are relations, everything else is
/// a literal.
struct EntityDescription {
  std::string uri;
  std::vector<Literal> literals;    // sorted, unique
  std::vector<Relation> relations;  // sorted, unique
  std::vector<TokenId> tokens;      // sorted, unique; tokens(e)
};

class KnowledgeBaseBuilder;

class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  Side side() const noexcept { return side_; }
  std::size_t size() const noexcept { return entities_.size(); }
  bool empty() const noexcept { return entities_.empty(); }

  const EntityDescription& entity(EntityIndex i) const { return entities_[i]; }
  std::span<const EntityDescription> entities() const noexcept { return entities_; }
  const std::string& uri(EntityIndex i) const { return entities_[i].uri; }

  std::optional<EntityIndex> find(std::string_view uri) const {
    auto it = std::lower_bound(entities_.begin(), entities_.end(), uri,
                               [](const EntityDescription& e, std::string_view u) { return e.uri < u; });
    if (it == entities_.end() || it->uri != uri) return std::nullopt;
    return static_cast<EntityIndex>(it - entities_.begin());
  }

  std::size_t attribute_count() const noexcept { return attributes_.size(); }
  const std::string& attribute_name(AttributeId a) const { return attributes_[a]; }
  std::optional<AttributeId> find_attribute(std::string_view name) const {
    auto it = std::lower_bound(attributes_.begin(), attributes_.end(), name);
    if (it == attributes_.end() || *it != name) return std::nullopt;
    return static_cast<AttributeId>(it - attributes_.begin());
  }

  std::size_t token_count() const noexcept { return token_strings_.size(); }
  const std::string& token(TokenId t) const { return token_strings_[t]; }
  std::optional<TokenId> find_token(std::string_view tok) const {
    auto it = std::lower_bound(token_strings_.begin(), token_strings_.end(), tok);
    if (it == token_strings_.end() || *it != tok) return std::nullopt;
    return static_cast<TokenId>(it - token_strings_.begin());
  }

  /// Entities whose literal values contain token `t`, ascending.
  std::span<const EntityIndex> postings(TokenId t) const { return postings_[t]; }

  /// Entity frequency: number of descriptions containing token `t`.
  std::size_t ef(TokenId t) const { return postings_[t].size(); }

  std::span<const TokenId> tokens(EntityIndex i) const { return entities_[i].tokens; }

  /// Distinct relation attributes of `i`, ascending.
  std::vector<AttributeId> relations(EntityIndex i) const {
    std::vector<AttributeId> out;
    for (const auto& r : entities_[i].relations) {
      if (out.empty() || out.back() != r.attribute) out.push_back(r.attribute);
    }
    return out;
  }

  /// Distinct neighbor entities of `i`, ascending.
  std::vector<EntityIndex> neighbors(EntityIndex i) const {
    std::vector<EntityIndex> out;
    out.reserve(entities_[i].relations.size());
    for (const auto& r : entities_[i].relations) out.push_back(r.target);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::size_t triple_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entities_) n += e.literals.size() + e.relations.size();
    return n;
  }

 private:
  friend class KnowledgeBaseBuilder;

  Side side_ = Side::kFirst;
  std::vector<EntityDescription> entities_;
  std::vector<std::string> attributes_;
  std::vector<std::string> token_strings_;
  std::vector<std::vector<EntityIndex>> postings_;
};

/// Accumulates triples and produces an immutable KnowledgeBase.
///
/// Every subject becomes a description. An object added through
/// add_reference() becomes a relation if some subject carries that URI once
/// all triples are in; otherwise it is kept as a literal (dangling reference).
class KnowledgeBaseBuilder {
 public:
  explicit KnowledgeBaseBuilder(Side side = Side::kFirst) : side_(side) {}

  void add_subject(std::string_view subject) { subject_id(subject); }

  void add_literal(std::string_view subject, std::string_view attribute, std::string_view value) {
    pending_.push_back({subject_id(subject), attribute_id(attribute), std::string(value), false});
  }

  void add_reference(std::string_view subject, std::string_view attribute, std::string_view object) {
    pending_.push_back({subject_id(subject), attribute_id(attribute), std::string(object), true});
  }

  std::size_t pending_triples() const noexcept { return pending_.size(); }

  KnowledgeBase build() && {
    KnowledgeBase kb;
    kb.side_ = side_;

    // Renumber subjects and attributes in lexicographic order.
    std::vector<std::uint32_t> subject_rank = rank_by_name(subject_names_);
    std::vector<std::uint32_t> attribute_rank = rank_by_name(attribute_names_);

    kb.entities_.resize(subject_names_.size());
    for (std::size_t s = 0; s < subject_names_.size(); ++s) {
      kb.entities_[subject_rank[s]].uri = subject_names_[s];
    }
    kb.attributes_.resize(attribute_names_.size());
    for (std::size_t a = 0; a < attribute_names_.size(); ++a) {
      kb.attributes_[attribute_rank[a]] = attribute_names_[a];
    }

    for (auto& p : pending_) {
      auto& e = kb.entities_[subject_rank[p.subject]];
      const AttributeId attr = attribute_rank[p.attribute];
      if (p.is_reference) {
        auto it = subject_ids_.find(p.value);
        if (it != subject_ids_.end()) {
          e.relations.push_back({attr, subject_rank[it->second]});
          continue;
        }
      }
      e.literals.push_back({attr, std::move(p.value)});
    }
    pending_.clear();

    std::vector<std::vector<std::string>> entity_tokens(kb.entities_.size());
    std::vector<std::string> dictionary;
    for (std::size_t i = 0; i < kb.entities_.size(); ++i) {
      auto& e = kb.entities_[i];
      std::sort(e.literals.begin(), e.literals.end());
      e.literals.erase(std::unique(e.literals.begin(), e.literals.end()), e.literals.end());
      std::sort(e.relations.begin(), e.relations.end());
      e.relations.erase(std::unique(e.relations.begin(), e.relations.end()), e.relations.end());

      auto& toks = entity_tokens[i];
      for (const auto& lit : e.literals) {
        for_each_token(lit.value, [&](std::string&& t) { toks.push_back(std::move(t)); });
      }
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      dictionary.insert(dictionary.end(), toks.begin(), toks.end());
    }
    std::sort(dictionary.begin(), dictionary.end());
    dictionary.erase(std::unique(dictionary.begin(), dictionary.end()), dictionary.end());

    kb.postings_.assign(dictionary.size(), {});
    for (std::size_t i = 0; i < kb.entities_.size(); ++i) {
      auto& ids = kb.entities_[i].tokens;
      ids.reserve(entity_tokens[i].size());
      // Both lists are sorted, so a forward scan resolves every token.
      auto cursor = dictionary.begin();
      for (const auto& t : entity_tokens[i]) {
        cursor = std::lower_bound(cursor, dictionary.end(), t);
        const auto id = static_cast<TokenId>(cursor - dictionary.begin());
        ids.push_back(id);
        kb.postings_[id].push_back(static_cast<EntityIndex>(i));
      }
    }
    kb.token_strings_ = std::move(dictionary);
    return kb;
  }

 private:
  struct PendingTriple {
    std::uint32_t subject;
    std::uint32_t attribute;
    std::string value;
    bool is_reference;
  };

  std::uint32_t subject_id(std::string_view s) {
    auto [it, inserted] =
        subject_ids_.try_emplace(std::string(s), static_cast<std::uint32_t>(subject_names_.size()));
    if (inserted) subject_names_.emplace_back(s);
    return it->second;
  }

  std::uint32_t attribute_id(std::string_view a) {
    auto [it, inserted] =
        attribute_ids_.try_emplace(std::string(a), static_cast<std::uint32_t>(attribute_names_.size()));
    if (inserted) attribute_names_.emplace_back(a);
    return it->second;
  }

  static std::vector<std::uint32_t> rank_by_name(const std::vector<std::string>& names) {
    std::vector<std::uint32_t> order(names.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names[a] < names[b]; });
    std::vector<std::uint32_t> rank(names.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    return rank;
  }

  Side side_;
  std::unordered_map<std::string, std::uint32_t> subject_ids_;
  std::vector<std::string> subject_names_;
  std::unordered_map<std::string, std::uint32_t> attribute_ids_;
  std::vector<std::string> attribute_names_;
  std::vector<PendingTriple> pending_;
};

/// Calls `fn(token_in_a, token_in_b)` for every token the two descriptions
/// share, in lexicographic token order.
template <class Fn>
void for_each_shared_token(const KnowledgeBase& a, EntityIndex i, const KnowledgeBase& b, EntityIndex j,
                           Fn&& fn) {
  auto ta = a.tokens(i);
  auto tb = b.tokens(j);
  std::size_t x = 0, y = 0;
  while (x < ta.size() && y < tb.size()) {
    const int cmp = a.token(ta[x]).compare(b.token(tb[y]));
    if (cmp < 0) {
      ++x;
    } else if (cmp > 0) {
      ++y;
    } else {
      fn(ta[x], tb[y]);
      ++x;
      ++y;
    }
  }
}

/// Value similarity of description `i` of `a` and description `j` of `b`:
/// the sum over shared tokens t of 1 / log2(EF_a(t) * EF_b(t) + 1).
/// Passing the same knowledge base twice gives the within-KB variant used for
/// self-similarity.
inline double value_sim(const KnowledgeBase& a, EntityIndex i, const KnowledgeBase& b, EntityIndex j) {
  double sum = 0.0;
  for_each_shared_token(a, i, b, j, [&](TokenId ta, TokenId tb) { sum += token_weight(a.ef(ta), b.ef(tb)); });
  return sum;
}

}  // namespace kbmatch
