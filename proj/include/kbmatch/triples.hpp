#pragma once

// Line-oriented readers and writers for knowledge bases and ground truth.
//
// Triple lines are `subject<TAB>predicate<TAB>object`. A double-quoted object
// is a literal; anything else is an identifier that becomes a relation when
// it names a subject of the same file. N-Triples lines
// (`<s> <p> "lit"@en .`) are accepted as well. Malformed lines are skipped
// and counted.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbmatch/error.hpp"
#include "kbmatch/knowledge_base.hpp"

namespace kbmatch {

struct TripleParseResult {
  KnowledgeBase kb;
  std::size_t triples = 0;
  std::size_t malformed_lines = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Term {
  std::string text;
  bool literal = false;
};

// Parses a double-quoted literal starting at s[pos] == '"'. On success
// advances pos past the closing quote and any @lang / ^^type suffix.
inline std::optional<std::string> parse_quoted(std::string_view s, std::size_t& pos) {
  std::string out;
  std::size_t i = pos + 1;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\') {
      if (++i >= s.size()) return std::nullopt;
      switch (s[i]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: out.push_back(s[i]); break;
      }
    } else if (c == '"') {
      break;
    } else {
      out.push_back(c);
    }
  }
  if (i >= s.size()) return std::nullopt;  // unterminated
  ++i;
  if (i < s.size() && s[i] == '@') {
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
  } else if (i + 1 < s.size() && s[i] == '^' && s[i + 1] == '^') {
    i += 2;
    if (i < s.size() && s[i] == '<') {
      const auto close = s.find('>', i);
      if (close == std::string_view::npos) return std::nullopt;
      i = close + 1;
    } else {
      while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    }
  }
  pos = i;
  return out;
}

// Identifier term: <iri>, _:blank or a bare token up to whitespace.
inline std::optional<std::string> parse_identifier(std::string_view s, std::size_t& pos) {
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] == '<') {
    const auto close = s.find('>', pos);
    if (close == std::string_view::npos) return std::nullopt;
    std::string out(s.substr(pos + 1, close - pos - 1));
    pos = close + 1;
    return out;
  }
  std::size_t end = pos;
  while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
  std::string out(s.substr(pos, end - pos));
  pos = end;
  return out;
}

inline std::optional<Term> parse_object(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  std::size_t pos = 0;
  Term t;
  if (field[0] == '"') {
    auto lit = parse_quoted(field, pos);
    if (!lit) return std::nullopt;
    t.text = std::move(*lit);
    t.literal = true;
  } else if (field[0] == '<') {
    auto id = parse_identifier(field, pos);
    if (!id) return std::nullopt;
    t.text = std::move(*id);
  } else {
    // Bare identifier: the whole field, minus an N-Triples terminator.
    std::string_view rest = field;
    if (rest.size() >= 2 && rest.back() == '.' && (rest[rest.size() - 2] == ' ' || rest[rest.size() - 2] == '\t')) {
      rest = trim(rest.substr(0, rest.size() - 1));
    }
    t.text = std::string(rest);
    return t.text.empty() ? std::nullopt : std::optional<Term>(std::move(t));
  }
  auto tail = trim(field.substr(pos));
  if (!tail.empty() && tail != ".") return std::nullopt;
  return t;
}

inline std::string strip_angle(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '<' && s.back() == '>') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

struct ParsedTriple {
  std::string subject;
  std::string predicate;
  Term object;
};

inline std::optional<ParsedTriple> parse_triple_line(std::string_view line) {
  const auto tab1 = line.find('\t');
  const auto tab2 = tab1 == std::string_view::npos ? std::string_view::npos : line.find('\t', tab1 + 1);
  ParsedTriple out;
  if (tab2 != std::string_view::npos) {
    out.subject = strip_angle(line.substr(0, tab1));
    out.predicate = strip_angle(line.substr(tab1 + 1, tab2 - tab1 - 1));
    auto obj = parse_object(line.substr(tab2 + 1));
    if (!obj) return std::nullopt;
    out.object = std::move(*obj);
  } else {
    // Whitespace-separated N-Triples; the terminating '.' is mandatory here.
    if (trim(line).empty() || trim(line).back() != '.') return std::nullopt;
    std::size_t pos = 0;
    auto skip_ws = [&] {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    };
    skip_ws();
    auto s = parse_identifier(line, pos);
    skip_ws();
    auto p = parse_identifier(line, pos);
    skip_ws();
    if (!s || !p || pos >= line.size()) return std::nullopt;
    auto obj = parse_object(line.substr(pos));
    if (!obj) return std::nullopt;
    out.subject = std::move(*s);
    out.predicate = std::move(*p);
    out.object = std::move(*obj);
  }
  if (out.subject.empty() || out.predicate.empty()) return std::nullopt;
  return out;
}

}  // namespace detail

/// Reads one triple per line. Blank lines and `#` comments are ignored.
inline TripleParseResult parse_triples(std::istream& in, Side side) {
  TripleParseResult result;
  KnowledgeBaseBuilder builder(side);
  std::string line;
  while (std::getline(in, line)) {
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto t = detail::parse_triple_line(line);
    if (!t) {
      ++result.malformed_lines;
      continue;
    }
    ++result.triples;
    if (t->object.literal) {
      builder.add_literal(t->subject, t->predicate, t->object.text);
    } else {
      builder.add_reference(t->subject, t->predicate, t->object.text);
    }
  }
  result.kb = std::move(builder).build();
  return result;
}

inline TripleParseResult load_triples(const std::string& path, Side side) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triple file: " + path);
  return parse_triples(in, side);
}

/// Writes `kb` in the tab-separated format read by parse_triples.
inline void write_triples(std::ostream& out, const KnowledgeBase& kb) {
  auto quote = [](const std::string& v) {
    std::string q = "\"";
    for (char c : v) {
      switch (c) {
        case '"': q += "\\\""; break;
        case '\\': q += "\\\\"; break;
        case '\n': q += "\\n"; break;
        case '\t': q += "\\t"; break;
        default: q.push_back(c);
      }
    }
    q.push_back('"');
    return q;
  };
  for (const auto& e : kb.entities()) {
    for (const auto& l : e.literals) {
      out << e.uri << '\t' << kb.attribute_name(l.attribute) << '\t' << quote(l.value) << '\n';
    }
    for (const auto& r : e.relations) {
      out << e.uri << '\t' << kb.attribute_name(r.attribute) << '\t' << kb.uri(r.target) << '\n';
    }
  }
}

/// 1-to-1 reference alignment between the two knowledge bases, by URI.
class GroundTruth {
 public:
  /// Adds a pair; returns false (and ignores it) if either id already
  /// appears in another pair.
  bool add(std::string first, std::string second) {
    if (by_first_.count(first) || by_second_.count(second)) return false;
    by_first_.emplace(first, second);
    by_second_.emplace(second, first);
    pairs_.emplace_back(std::move(first), std::move(second));
    return true;
  }

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const noexcept { return pairs_; }

  bool contains(const std::string& first, const std::string& second) const {
    auto it = by_first_.find(first);
    return it != by_first_.end() && it->second == second;
  }

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::unordered_map<std::string, std::string> by_first_;
  std::unordered_map<std::string, std::string> by_second_;
};

struct GroundTruthParseResult {
  GroundTruth truth;
  std::size_t malformed_lines = 0;
  std::size_t conflicting_pairs = 0;
};

/// Two ids per line, separated by a tab (or whitespace).
inline GroundTruthParseResult parse_ground_truth(std::istream& in) {
  GroundTruthParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::size_t pos = 0;
    auto a = detail::parse_identifier(body, pos);
    while (pos < body.size() && (body[pos] == ' ' || body[pos] == '\t')) ++pos;
    auto b = detail::parse_identifier(body, pos);
    auto tail = detail::trim(body.substr(std::min(pos, body.size())));
    if (!a || !b || a->empty() || b->empty() || (!tail.empty() && tail != ".")) {
      ++result.malformed_lines;
      continue;
    }
    if (!result.truth.add(std::move(*a), std::move(*b))) ++result.conflicting_pairs;
  }
  return result;
}

inline GroundTruthParseResult load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth file: " + path);
  return parse_ground_truth(in);
}

inline void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  for (const auto& [a, b] : truth.pairs()) out << a << '\t' << b << '\n';
}

/// Ground truth mapped onto entity indices. Pairs whose ids are unknown to
/// the knowledge bases still count towards size() (they can only be missed).
struct ResolvedTruth {
  std::size_t total = 0;
  std::vector<std::optional<EntityIndex>> partner_of_first;  // indexed by KB1 entity
  std::vector<std::pair<EntityIndex, EntityIndex>> pairs;    // resolvable pairs

  std::size_t size() const noexcept { return total; }

  bool contains(EntityIndex first, EntityIndex second) const {
    return first < partner_of_first.size() && partner_of_first[first] == second;
  }
};

inline ResolvedTruth resolve(const GroundTruth& truth, const KnowledgeBase& first, const KnowledgeBase& second) {
  ResolvedTruth r;
  r.total = truth.size();
  r.partner_of_first.assign(first.size(), std::nullopt);
  for (const auto& [a, b] : truth.pairs()) {
    auto i = first.find(a);
    auto j = second.find(b);
    if (i && j) {
      r.partner_of_first[*i] = *j;
      r.pairs.emplace_back(*i, *j);
    }
  }
  std::sort(r.pairs.begin(), r.pairs.end());
  return r;
}

}  // namespace kbmatch
