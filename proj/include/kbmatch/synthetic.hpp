#pragma once

// Seeded generator of KB pairs with a planted 1-to-1 alignment.
//
// Each KB holds hubs, items and unmatched extras. Hubs and "strong" items
// share at least one token that nothing else carries, so their value
// similarity is >= 1; strong items often carry identical labels too.
// "Near" items come in twins: both twins and both of their copies share the
// same two group tokens, which caps the value similarity of a true pair at
// 2 / log2(5) < 1 and makes the twins indistinguishable by value. What tells
// them apart is the pair of hubs each one links to.
//
// The two KBs use disjoint attribute names, so nothing schema-based can
// line them up.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/triples.hpp"

namespace kbmatch {

struct SyntheticConfig {
  std::size_t entities = 10000;     // per KB
  double hub_fraction = 0.15;
  double near_fraction = 0.40;      // of the non-hub entities
  double extra_fraction = 0.10;     // of the non-hub entities, unmatched
  double shared_label_rate = 0.6;   // strong items with identical labels
  double hub_label_rate = 0.8;
  std::size_t filler_per_entity = 2;
  std::size_t entities_per_filler = 10;  // filler vocabulary = entities / this
  std::uint64_t seed = 42;
};

enum class PlantedKind : std::uint8_t { kHub, kStrong, kNear };

struct SyntheticDataset {
  KnowledgeBase first;
  KnowledgeBase second;
  GroundTruth truth;
  std::vector<std::pair<std::string, PlantedKind>> kinds;  // KB1 uri of every planted pair
};

namespace detail {

inline std::string base36(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string s;
  do {
    s.push_back(digits[v % 36]);
    v /= 36;
  } while (v);
  std::reverse(s.begin(), s.end());
  return s;
}

class WordSource {
 public:
  explicit WordSource(char prefix) : prefix_(prefix) {}
  std::string next() { return std::string(1, prefix_) + "x" + base36(counter_++); }

 private:
  char prefix_;
  std::uint64_t counter_ = 0;
};

}  // namespace detail

inline SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  const std::size_t n = cfg.entities;
  const std::size_t hubs = std::max<std::size_t>(2, static_cast<std::size_t>(n * cfg.hub_fraction));
  const std::size_t rest = n > hubs ? n - hubs : 0;
  const std::size_t extras = static_cast<std::size_t>(rest * cfg.extra_fraction);
  std::size_t near = static_cast<std::size_t>(rest * cfg.near_fraction) & ~std::size_t{1};  // even: twins
  const std::size_t strong = rest - extras - near;

  detail::WordSource unique_words('u'), group_words('g'), private_words('p');
  const std::size_t filler_vocab = std::max<std::size_t>(1, n / cfg.entities_per_filler);
  auto filler = [&](std::size_t i) { return "fx" + detail::base36(i); };
  const std::vector<std::string> stopwords = {"the", "of", "and", "record"};

  // Opaque, shuffled ids so that id order says nothing about the alignment.
  auto ids = [&](const char* ns) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::string(ns) + detail::base36(perm[i] * 7919 + 13);
    return out;
  };
  const auto uri1 = ids("http://alpha.example/res/");
  const auto uri2 = ids("http://beta.example/item/");

  KnowledgeBaseBuilder b1(Side::kFirst), b2(Side::kSecond);
  SyntheticDataset ds;

  struct Draft {
    std::vector<std::string> desc;  // description tokens
    std::string label;
  };
  auto add_filler = [&](Draft& d, const std::vector<std::string>& exclude) {
    for (std::size_t f = 0; f < cfg.filler_per_entity; ++f) {
      std::string w;
      do {
        w = filler(uniform(filler_vocab));
      } while (std::find(exclude.begin(), exclude.end(), w) != exclude.end());
      d.desc.push_back(std::move(w));
    }
    d.desc.push_back(stopwords[uniform(stopwords.size())]);
    d.desc.push_back(stopwords[uniform(stopwords.size())]);
  };
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) {
      if (!s.empty()) s.push_back(' ');
      s += w;
    }
    return s;
  };
  // Some descriptions are missing, except on near twins: losing the shared
  // group tokens there would lift the sibling's value similarity above 1.
  auto emit1 = [&](std::size_t e, const Draft& d, bool keep_desc = false) {
    b1.add_subject(uri1[e]);
    b1.add_literal(uri1[e], "rdfs:label", d.label);
    if (keep_desc || e % 10 != 0) b1.add_literal(uri1[e], "dc:description", join(d.desc));
  };
  auto emit2 = [&](std::size_t e, const Draft& d, bool keep_desc = false) {
    b2.add_subject(uri2[e]);
    b2.add_literal(uri2[e], "schema:name", d.label);
    if (keep_desc || e % 10 != 3) b2.add_literal(uri2[e], "schema:about", join(d.desc));
  };
  auto fillers_of = [](const Draft& d) {
    std::vector<std::string> out;
    for (const auto& w : d.desc) {
      if (w.rfind("fx", 0) == 0) out.push_back(w);
    }
    return out;
  };

  // Layout per KB: [0, hubs) hubs, then strong, near, extras. The copy of
  // KB1 entity e is KB2 entity e for every planted kind.
  const std::size_t strong_begin = hubs;
  const std::size_t near_begin = strong_begin + strong;
  const std::size_t extra_begin = near_begin + near;

  for (std::size_t h = 0; h < hubs; ++h) {
    Draft d1, d2;
    const auto u1 = unique_words.next(), u2 = unique_words.next();
    d1.desc = {u1, u2};
    d2.desc = {u1, u2};
    add_filler(d1, {});
    add_filler(d2, {});
    d1.label = "hub " + private_words.next();
    d2.label = chance(cfg.hub_label_rate) ? d1.label : "hub " + private_words.next();
    emit1(h, d1);
    emit2(h, d2);
    ds.truth.add(uri1[h], uri2[h]);
    ds.kinds.emplace_back(uri1[h], PlantedKind::kHub);
  }

  for (std::size_t e = strong_begin; e < near_begin; ++e) {
    Draft d1, d2;
    const std::size_t shared = 1 + uniform(3);
    for (std::size_t s = 0; s < shared; ++s) {
      auto w = unique_words.next();
      d1.desc.push_back(w);
      d2.desc.push_back(w);
    }
    d1.desc.push_back(private_words.next());
    d2.desc.push_back(private_words.next());
    add_filler(d1, {});
    add_filler(d2, {});
    d1.label = private_words.next() + " " + private_words.next();
    d2.label = chance(cfg.shared_label_rate) ? d1.label : private_words.next();
    emit1(e, d1);
    emit2(e, d2);
    ds.truth.add(uri1[e], uri2[e]);
    ds.kinds.emplace_back(uri1[e], PlantedKind::kStrong);
  }

  for (std::size_t e = near_begin; e + 1 < extra_begin; e += 2) {
    const auto g1 = group_words.next(), g2 = group_words.next();
    for (std::size_t t = e; t < e + 2; ++t) {
      Draft d1, d2;
      d1.desc = {g1, g2, private_words.next()};
      d2.desc = {g1, g2, private_words.next()};
      add_filler(d1, {});
      add_filler(d2, fillers_of(d1));
      d1.label = private_words.next() + " " + private_words.next();
      d2.label = private_words.next();
      emit1(t, d1, true);
      emit2(t, d2, true);
      ds.truth.add(uri1[t], uri2[t]);
      ds.kinds.emplace_back(uri1[t], PlantedKind::kNear);
    }
  }

  for (std::size_t e = extra_begin; e < n; ++e) {
    Draft d1, d2;
    d1.desc = {private_words.next()};
    d2.desc = {private_words.next()};
    add_filler(d1, {});
    add_filler(d2, {});
    d1.label = private_words.next();
    d2.label = private_words.next();
    emit1(e, d1);
    emit2(e, d2);
  }

  // Every non-hub entity links to two distinct hubs, mirrored in KB2 for
  // planted pairs. The hub pair of a near twin differs from its sibling's.
  for (std::size_t e = hubs; e < n; ++e) {
    const std::size_t h1 = uniform(hubs);
    std::size_t h2 = uniform(hubs - 1);
    if (h2 >= h1) ++h2;
    b1.add_reference(uri1[e], "ex:locatedIn", uri1[h1]);
    b1.add_reference(uri1[e], "ex:madeBy", uri1[h2]);
    if (e < extra_begin) {
      b2.add_reference(uri2[e], "schema:location", uri2[h1]);
      b2.add_reference(uri2[e], "schema:creator", uri2[h2]);
    } else {
      const std::size_t k1 = uniform(hubs);
      std::size_t k2 = uniform(hubs - 1);
      if (k2 >= k1) ++k2;
      b2.add_reference(uri2[e], "schema:location", uri2[k1]);
      b2.add_reference(uri2[e], "schema:creator", uri2[k2]);
    }
  }

  ds.first = std::move(b1).build();
  ds.second = std::move(b2).build();
  return ds;
}

}  // namespace kbmatch
