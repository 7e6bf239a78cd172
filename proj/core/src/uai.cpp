#include "mixmap/uai.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mixmap/errors.hpp"
#include "mixmap/logmath.hpp"

namespace mixmap {

namespace {

class TokenStream {
 public:
  explicit TokenStream(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens_.push_back(tok);
  }

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t position() const { return pos_; }

  const std::string& next(const std::string& section) {
    if (done()) throw ParseError("unexpected end of input in " + section, pos_);
    return tokens_[pos_++];
  }

  long integer(const std::string& section, long lo, long hi) {
    const std::size_t at = pos_;
    const std::string& tok = next(section);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0') {
      throw ParseError("expected an integer in " + section + ", got '" + tok + "'", at);
    }
    if (v < lo || v > hi) throw ParseError("value " + tok + " out of range in " + section, at);
    return v;
  }

  double real(const std::string& section) {
    const std::size_t at = pos_;
    const std::string& tok = next(section);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || std::isnan(v) || std::isinf(v)) {
      throw ParseError("expected a finite number in " + section + ", got '" + tok + "'", at);
    }
    if (v < 0.0) throw ParseError("negative table entry in " + section, at);
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

constexpr long kMaxCount = 1L << 30;

}  // namespace

FactorModel parse_uai(const std::string& text) {
  TokenStream ts(text);
  const std::size_t type_at = ts.position();
  const std::string type = ts.next("network type");
  if (type != "MARKOV" && type != "BAYES") {
    throw ParseError("network type must be MARKOV or BAYES, got '" + type + "'", type_at);
  }
  const int n = static_cast<int>(ts.integer("variable count", 0, kMaxCount));
  std::vector<int> cards(n);
  for (int i = 0; i < n; ++i) cards[i] = static_cast<int>(ts.integer("cardinalities", 1, kMaxCount));
  const int f = static_cast<int>(ts.integer("factor count", 0, kMaxCount));
  std::vector<Factor> factors(f);
  for (int k = 0; k < f; ++k) {
    const int size = static_cast<int>(ts.integer("factor scopes", 0, n));
    for (int q = 0; q < size; ++q) {
      const std::size_t at = ts.position();
      const int v = static_cast<int>(ts.integer("factor scopes", 0, n - 1));
      for (int w : factors[k].scope) {
        if (w == v) throw ParseError("variable repeated in factor scope", at);
      }
      factors[k].scope.push_back(v);
    }
  }
  for (int k = 0; k < f; ++k) {
    const long count = ts.integer("factor tables", 0, kMaxCount);
    std::size_t expected = 1;
    for (int v : factors[k].scope) expected *= static_cast<std::size_t>(cards[v]);
    if (static_cast<std::size_t>(count) != expected) {
      throw StructuralError("factor " + std::to_string(k) + " table has " + std::to_string(count) +
                            " entries, scope requires " + std::to_string(expected));
    }
    factors[k].table.reserve(expected);
    for (long e = 0; e < count; ++e) {
      const double p = ts.real("factor tables");
      factors[k].table.push_back(p > 0.0 ? std::log(p) : kNegInf);
    }
  }
  if (!ts.done()) throw ParseError("trailing tokens after factor tables", ts.position());
  return FactorModel(cards, std::vector<Role>(n, Role::Sum), std::move(factors));
}

std::string serialize_uai(const FactorModel& model) {
  std::string out = "MARKOV\n" + std::to_string(model.num_vars()) + "\n";
  for (int i = 0; i < model.num_vars(); ++i) out += (i ? " " : "") + std::to_string(model.card(i));
  out += "\n" + std::to_string(model.factors().size()) + "\n";
  for (const auto& f : model.factors()) {
    out += std::to_string(f.scope.size());
    for (int v : f.scope) out += " " + std::to_string(v);
    out += "\n";
  }
  char buf[32];
  for (const auto& f : model.factors()) {
    out += "\n" + std::to_string(f.table.size()) + "\n";
    for (std::size_t e = 0; e < f.table.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%.17g", std::exp(f.table[e]));
      out += (e ? " " : "") + std::string(buf);
    }
    out += "\n";
  }
  return out;
}

std::vector<int> parse_query(const std::string& text, int num_vars) {
  TokenStream ts(text);
  const int count = static_cast<int>(ts.integer("query count", 0, num_vars));
  std::set<int> seen;
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const std::size_t at = ts.position();
    const int v = static_cast<int>(ts.integer("query indices", 0, num_vars - 1));
    if (!seen.insert(v).second) throw ParseError("variable repeated in query", at);
    out.push_back(v);
  }
  if (!ts.done()) throw ParseError("trailing tokens after query indices", ts.position());
  return out;
}

std::vector<std::pair<int, int>> parse_evidence(const std::string& text, const std::vector<int>& cards) {
  TokenStream ts(text);
  const int n = static_cast<int>(cards.size());
  const int count = static_cast<int>(ts.integer("evidence count", 0, n));
  std::set<int> seen;
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < count; ++k) {
    const std::size_t at = ts.position();
    const int v = static_cast<int>(ts.integer("evidence variables", 0, n - 1));
    if (!seen.insert(v).second) throw ParseError("variable repeated in evidence", at);
    const int s = static_cast<int>(ts.integer("evidence states", 0, cards[v] - 1));
    out.emplace_back(v, s);
  }
  if (!ts.done()) throw ParseError("trailing tokens after evidence pairs", ts.position());
  return out;
}

std::string serialize_query(const std::vector<int>& max_vars) {
  std::string out = std::to_string(max_vars.size());
  for (int v : max_vars) out += " " + std::to_string(v);
  return out + "\n";
}

FactorModel apply_query(const FactorModel& model, const std::vector<int>& max_vars) {
  std::vector<Role> roles(model.num_vars(), Role::Sum);
  for (int v : max_vars) {
    if (v < 0 || v >= model.num_vars()) throw InvalidArgument("query variable out of range");
    roles[v] = Role::Max;
  }
  return model.with_roles(std::move(roles));
}

FactorModel apply_evidence(const FactorModel& model, const std::vector<std::pair<int, int>>& evidence) {
  std::vector<int> observed(model.num_vars(), -1);
  for (const auto& [v, s] : evidence) {
    if (v < 0 || v >= model.num_vars() || s < 0 || s >= model.card(v)) {
      throw InvalidArgument("evidence out of range");
    }
    observed[v] = s;
  }
  std::vector<int> cards = model.cards();
  for (int v = 0; v < model.num_vars(); ++v) {
    if (observed[v] >= 0) cards[v] = 1;
  }
  std::vector<Factor> factors;
  for (const auto& f : model.factors()) {
    Factor g{f.scope, {}};
    std::size_t size = 1;
    for (int v : f.scope) size *= static_cast<std::size_t>(cards[v]);
    g.table.reserve(size);
    std::vector<int> assignment(model.num_vars(), 0);
    for (std::size_t z = 0; z < size; ++z) {
      std::size_t rest = z;
      for (int q = static_cast<int>(f.scope.size()) - 1; q >= 0; --q) {
        const int v = f.scope[q];
        if (observed[v] >= 0) {
          assignment[v] = observed[v];
        } else {
          assignment[v] = static_cast<int>(rest % cards[v]);
          rest /= cards[v];
        }
      }
      g.table.push_back(f.table[table_index(f.scope, model.cards(), assignment)]);
    }
    factors.push_back(std::move(g));
  }
  return FactorModel(std::move(cards), model.roles(), std::move(factors));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mixmap
