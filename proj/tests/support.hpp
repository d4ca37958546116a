#pragma once

// Fixtures and brute-force oracles shared by the unit tests. The oracles
// work from raw literal strings and never call the library's indices.

#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kbmatch/kbmatch.hpp"

namespace kbtest {

using kbmatch::EntityIndex;
using kbmatch::KnowledgeBase;
using kbmatch::Side;

inline KnowledgeBase parse(const std::string& text, Side side = Side::kFirst) {
  std::istringstream in(text);
  return kbmatch::parse_triples(in, side).kb;
}

inline KnowledgeBase sample(const char* name, Side side) {
  return kbmatch::load_triples(std::string(KBMATCH_SAMPLE_DIR) + "/" + name, side).kb;
}

inline std::set<std::string> oracle_tokens(const std::string& value) {
  std::set<std::string> out;
  std::string cur;
  for (char c : value + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  return out;
}

inline std::set<std::string> oracle_tokens(const KnowledgeBase& kb, EntityIndex i) {
  std::set<std::string> out;
  for (const auto& l : kb.entity(i).literals) {
    auto t = oracle_tokens(l.value);
    out.insert(t.begin(), t.end());
  }
  return out;
}

/// Entity frequency of every token by scanning all descriptions.
inline std::map<std::string, std::size_t> oracle_ef(const KnowledgeBase& kb) {
  std::map<std::string, std::size_t> ef;
  for (EntityIndex i = 0; i < kb.size(); ++i) {
    for (const auto& t : oracle_tokens(kb, i)) ++ef[t];
  }
  return ef;
}

inline double oracle_value_sim(const KnowledgeBase& a, EntityIndex i, const KnowledgeBase& b, EntityIndex j) {
  const auto ea = oracle_ef(a);
  const auto eb = oracle_ef(b);
  const auto ta = oracle_tokens(a, i);
  const auto tb = oracle_tokens(b, j);
  double s = 0.0;
  for (const auto& t : ta) {
    if (tb.count(t)) s += 1.0 / std::log2(static_cast<double>(ea.at(t) * eb.at(t)) + 1.0);
  }
  return s;
}

struct RandomKbSpec {
  std::size_t entities = 10;
  std::size_t vocabulary = 12;
  std::size_t max_values = 3;
  std::size_t max_words = 3;
  std::size_t relations = 3;
  double link_probability = 0.3;
  std::string prefix = "e";
};

/// Random KB over a small shared vocabulary, so two KBs drawn with the same
/// vocabulary overlap heavily.
inline KnowledgeBase random_kb(std::mt19937_64& rng, Side side, const RandomKbSpec& spec) {
  std::uniform_int_distribution<std::size_t> word(0, spec.vocabulary - 1);
  std::uniform_int_distribution<std::size_t> values(0, spec.max_values);
  std::uniform_int_distribution<std::size_t> words(1, spec.max_words);
  std::uniform_int_distribution<std::size_t> target(0, spec.entities - 1);
  std::uniform_int_distribution<std::size_t> rel(0, spec.relations ? spec.relations - 1 : 0);
  std::bernoulli_distribution link(spec.link_probability);
  kbmatch::KnowledgeBaseBuilder b(side);
  auto uri = [&](std::size_t i) { return spec.prefix + std::to_string(i); };
  for (std::size_t i = 0; i < spec.entities; ++i) {
    b.add_subject(uri(i));
    const auto nv = values(rng);
    for (std::size_t v = 0; v < nv; ++v) {
      std::string val;
      const auto nw = words(rng);
      for (std::size_t w = 0; w < nw; ++w) val += (w ? " " : "") + std::string("w") + std::to_string(word(rng));
      b.add_literal(uri(i), "attr" + std::to_string(v % 2), val);
    }
    for (std::size_t r = 0; r < spec.relations; ++r) {
      if (link(rng)) {
        const auto t = target(rng);
        if (t != i) b.add_reference(uri(i), "rel" + std::to_string(rel(rng)), uri(t));
      }
    }
  }
  return std::move(b).build();
}

}  // namespace kbtest
