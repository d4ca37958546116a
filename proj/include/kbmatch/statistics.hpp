#pragma once

// Per-KB statistics that stand in for schema knowledge: how important each
// relation is, which neighbors of an entity are worth looking at, and which
// literal attributes behave like names.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbmatch/knowledge_base.hpp"

namespace kbmatch {

inline double harmonic_mean(double a, double b) noexcept {
  return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

struct RelationStats {
  AttributeId relation = 0;
  std::string name;
  std::size_t instances = 0;  // distinct (subject, object) pairs
  std::size_t objects = 0;    // distinct objects
  double support = 0.0;
  double discriminability = 0.0;
  double importance = 0.0;
};

/// Importance of every relation of one knowledge base, plus the global
/// order used to rank an entity's relations.
class RelationStatsTable {
 public:
  RelationStatsTable() = default;

  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }

  /// Relations by descending importance, ties by ascending name.
  const std::vector<AttributeId>& global_order() const noexcept { return order_; }

  const RelationStats* find(AttributeId a) const {
    return a < by_attribute_.size() && by_attribute_[a] ? &*by_attribute_[a] : nullptr;
  }

  const RelationStats* find(const KnowledgeBase& kb, std::string_view name) const {
    auto a = kb.find_attribute(name);
    return a ? find(*a) : nullptr;
  }

  /// Position of `a` in global_order(); relations never seen rank last.
  std::size_t rank(AttributeId a) const {
    return a < rank_.size() ? rank_[a] : order_.size();
  }

 private:
  friend RelationStatsTable relation_stats(const KnowledgeBase& kb);

  std::vector<std::optional<RelationStats>> by_attribute_;
  std::vector<AttributeId> order_;
  std::vector<std::size_t> rank_;
};

/// support(p) = |instances(p)| / |E|^2, discriminability(p) =
/// |objects(p)| / |instances(p)|, importance = their harmonic mean.
inline RelationStatsTable relation_stats(const KnowledgeBase& kb) {
  RelationStatsTable table;
  const std::size_t n_attr = kb.attribute_count();
  std::vector<std::size_t> instances(n_attr, 0);
  std::vector<std::vector<EntityIndex>> objects(n_attr);
  for (const auto& e : kb.entities()) {
    // relations are unique per entity, so each one is a distinct instance
    for (const auto& r : e.relations) {
      ++instances[r.attribute];
      objects[r.attribute].push_back(r.target);
    }
  }

  table.by_attribute_.assign(n_attr, std::nullopt);
  const double n = static_cast<double>(kb.size());
  for (AttributeId a = 0; a < n_attr; ++a) {
    if (instances[a] == 0) continue;
    auto& objs = objects[a];
    std::sort(objs.begin(), objs.end());
    objs.erase(std::unique(objs.begin(), objs.end()), objs.end());
    RelationStats s;
    s.relation = a;
    s.name = kb.attribute_name(a);
    s.instances = instances[a];
    s.objects = objs.size();
    s.support = static_cast<double>(s.instances) / (n * n);
    s.discriminability = static_cast<double>(s.objects) / static_cast<double>(s.instances);
    s.importance = harmonic_mean(s.support, s.discriminability);
    table.by_attribute_[a] = std::move(s);
    table.order_.push_back(a);
  }
  std::sort(table.order_.begin(), table.order_.end(), [&](AttributeId x, AttributeId y) {
    const auto& sx = *table.by_attribute_[x];
    const auto& sy = *table.by_attribute_[y];
    if (sx.importance != sy.importance) return sx.importance > sy.importance;
    return sx.name < sy.name;
  });
  table.rank_.assign(n_attr, table.order_.size());
  for (std::size_t r = 0; r < table.order_.size(); ++r) table.rank_[table.order_[r]] = r;
  return table;
}

/// The (at most) `n` relations of entity `i` with the highest importance.
inline std::vector<AttributeId> top_n_relations(const KnowledgeBase& kb, EntityIndex i,
                                                const RelationStatsTable& stats, std::size_t n) {
  auto rels = kb.relations(i);
  std::sort(rels.begin(), rels.end(),
            [&](AttributeId a, AttributeId b) { return stats.rank(a) < stats.rank(b); });
  if (rels.size() > n) rels.resize(n);
  return rels;
}

/// Neighbors of `i` reached through one of its top-`n` relations, ascending.
inline std::vector<EntityIndex> top_n_neighbors(const KnowledgeBase& kb, EntityIndex i,
                                                const RelationStatsTable& stats, std::size_t n) {
  const auto top = top_n_relations(kb, i, stats, n);
  std::vector<EntityIndex> out;
  for (const auto& r : kb.entity(i).relations) {
    if (std::find(top.begin(), top.end(), r.attribute) != top.end()) out.push_back(r.target);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Name attributes

struct NameAttributeStats {
  AttributeId attribute = 0;
  std::string name;
  std::size_t subjects = 0;         // entities with a literal value for it
  std::size_t instances = 0;        // distinct (entity, value) pairs
  std::size_t distinct_values = 0;
  double support = 0.0;               // subjects / |E|
  double distinct_value_ratio = 0.0;  // distinct_values / instances
  double importance = 0.0;
};

/// Statistics of every attribute that carries at least one literal value,
/// sorted by descending importance (ties by ascending name).
///
/// With `use_discriminability` false the ranking is by support alone.
inline std::vector<NameAttributeStats> name_attribute_stats(const KnowledgeBase& kb,
                                                            bool use_discriminability = true) {
  const std::size_t n_attr = kb.attribute_count();
  std::vector<NameAttributeStats> stats(n_attr);
  std::vector<std::vector<const std::string*>> values(n_attr);
  for (const auto& e : kb.entities()) {
    std::optional<AttributeId> last;
    for (const auto& l : e.literals) {  // sorted by attribute
      auto& s = stats[l.attribute];
      if (last != l.attribute) ++s.subjects;
      last = l.attribute;
      ++s.instances;
      values[l.attribute].push_back(&l.value);
    }
  }
  std::vector<NameAttributeStats> out;
  const double n = static_cast<double>(kb.size());
  for (AttributeId a = 0; a < n_attr; ++a) {
    auto& s = stats[a];
    if (s.instances == 0) continue;
    auto& v = values[a];
    std::sort(v.begin(), v.end(), [](const std::string* x, const std::string* y) { return *x < *y; });
    v.erase(std::unique(v.begin(), v.end(), [](const std::string* x, const std::string* y) { return *x == *y; }),
            v.end());
    s.attribute = a;
    s.name = kb.attribute_name(a);
    s.distinct_values = v.size();
    s.support = static_cast<double>(s.subjects) / n;
    s.distinct_value_ratio = static_cast<double>(s.distinct_values) / static_cast<double>(s.instances);
    s.importance = use_discriminability ? harmonic_mean(s.support, s.distinct_value_ratio) : s.support;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const NameAttributeStats& x, const NameAttributeStats& y) {
    if (x.importance != y.importance) return x.importance > y.importance;
    return x.name < y.name;
  });
  return out;
}

/// The global top-`k` name attributes of `kb`.
inline std::vector<AttributeId> top_k_name_attributes(const KnowledgeBase& kb, std::size_t k,
                                                      bool use_discriminability = true) {
  auto stats = name_attribute_stats(kb, use_discriminability);
  std::vector<AttributeId> out;
  for (std::size_t r = 0; r < stats.size() && r < k; ++r) out.push_back(stats[r].attribute);
  return out;
}

/// Literal values of `i` under any of `name_attrs`, sorted and unique.
inline std::vector<std::string> names(const KnowledgeBase& kb, EntityIndex i,
                                      const std::vector<AttributeId>& name_attrs) {
  std::vector<std::string> out;
  for (const auto& l : kb.entity(i).literals) {
    if (std::find(name_attrs.begin(), name_attrs.end(), l.attribute) != name_attrs.end()) {
      out.push_back(l.value);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace kbmatch
