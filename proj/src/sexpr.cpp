#include "affmetric/sexpr.hpp"

#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace affmetric {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at offset " + std::to_string(position)), position_(position) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<VarId>* declared) : text_(text) {
    if (declared) {
      strict_ = true;
      for (VarId v : *declared) free_by_name_.emplace(var_hint(v), v);
    }
  }

  Parsed run() {
    Formula f = formula();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
    return {f, f->free_vars()};
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string_view atom() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    if (start == pos_) throw ParseError("expected atom", start);
    return text_.substr(start, pos_ - start);
  }

  Rational rational() {
    skip_space();
    std::size_t at = pos_;
    std::string_view a = atom();
    try {
      return Rational::parse(a);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), at);
    }
  }

  VarId symbol_ref() {
    skip_space();
    std::size_t at = pos_;
    std::string name(atom());
    check_symbol(name, at);
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    auto found = free_by_name_.find(name);
    if (found != free_by_name_.end()) return found->second;
    if (strict_) throw ParseError("unbound variable '" + name + "'", at);
    VarId v = fresh_var(name);
    free_by_name_.emplace(name, v);
    return v;
  }

  void check_symbol(const std::string& name, std::size_t at) {
    char c = name.front();
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_'))
      throw ParseError("invalid symbol '" + name + "'", at);
  }

  Formula formula() {
    expect('(');
    std::size_t at = pos_;
    std::string_view head = atom();
    Formula out;
    if (head == "const") {
      out = make_const(rational());
    } else if (head == "dist") {
      VarId a = symbol_ref();
      VarId b = symbol_ref();
      out = make_dist(a, b);
    } else if (head == "affine") {
      Rational c = rational();
      std::vector<Term> terms;
      while (peek('(')) {
        expect('(');
        Rational k = rational();
        Formula f = formula();
        expect(')');
        if (k.is_zero()) throw ParseError("zero coefficient", at);
        terms.push_back({k, f});
      }
      out = make_affine(c, std::move(terms));
    } else if (head == "inf" || head == "sup") {
      skip_space();
      std::size_t sym_at = pos_;
      std::string name(atom());
      check_symbol(name, sym_at);
      VarId x = fresh_var(name);
      scope_.emplace_back(name, x);
      Formula body = formula();
      scope_.pop_back();
      if (!body->has_free(x)) throw ParseError("bound variable '" + name + "' does not occur in its body", sym_at);
      out = make_quant(head == "inf" ? Kind::Inf : Kind::Sup, x, body);
    } else {
      throw ParseError("unknown form '" + std::string(head) + "'", at);
    }
    expect(')');
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool strict_ = false;
  std::vector<std::pair<std::string, VarId>> scope_;
  std::unordered_map<std::string, VarId> free_by_name_;
};

class Printer {
 public:
  explicit Printer(const Formula& f, const std::vector<VarId>& reserved = {}) {
    for (VarId x : reserved) names_.emplace(x, claim(var_hint(x)));
    for (VarId x : f->free_vars())
      if (!names_.count(x)) names_.emplace(x, claim(var_hint(x)));
  }

  const std::string& name(VarId x) const { return names_.at(x); }

  void print(const Formula& f, std::string& out) {
    switch (f->kind()) {
      case Kind::Const:
        out += "(const ";
        out += f->value().str();
        out += ')';
        return;
      case Kind::Dist:
        out += "(dist ";
        out += names_.at(f->u());
        out += ' ';
        out += names_.at(f->v());
        out += ')';
        return;
      case Kind::Affine:
        out += "(affine ";
        out += f->value().str();
        for (const auto& t : f->terms()) {
          out += " (";
          out += t.coef.str();
          out += ' ';
          print(t.sub, out);
          out += ')';
        }
        out += ')';
        return;
      case Kind::Inf:
      case Kind::Sup: {
        std::string name = claim(var_hint(f->bound()));
        names_[f->bound()] = name;
        out += '(';
        out += kind_name(f->kind());
        out += ' ';
        out += name;
        out += ' ';
        print(f->body(), out);
        out += ')';
        return;
      }
    }
  }

 private:
  std::string claim(const std::string& hint) {
    std::string base = hint.empty() ? "v" : hint;
    if (used_.insert(base).second) return base;
    for (int k = 2;; ++k) {
      std::string cand = base + "_" + std::to_string(k);
      if (used_.insert(cand).second) return cand;
    }
  }

  std::unordered_set<std::string> used_;
  std::unordered_map<VarId, std::string> names_;
};

}  // namespace

Parsed parse_formula(std::string_view text) { return Parser(text, nullptr).run(); }

Formula parse_formula(std::string_view text, const std::vector<VarId>& declared) {
  return Parser(text, &declared).run().formula;
}

std::string serialize(const Formula& f) {
  std::string out;
  Printer(f).print(f, out);
  return out;
}

Parsed parse_formula_file(std::string_view text) {
  std::string body;
  std::vector<VarId> declared;
  bool header = false;
  std::size_t offset = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == ';') {
      std::string_view rest = std::string_view(line).substr(first + 1);
      std::size_t k = rest.find_first_not_of(' ');
      if (k != std::string_view::npos && rest.substr(k, 5) == "free:") {
        if (header) throw ParseError("duplicate free-variable header", offset + first);
        header = true;
        std::istringstream names{std::string(rest.substr(k + 5))};
        std::string name;
        std::unordered_set<std::string> seen;
        while (names >> name) {
          if (!seen.insert(name).second) throw ParseError("duplicate variable '" + name + "' in header", offset + first);
          declared.push_back(fresh_var(name));
        }
      }
      body += std::string(line.size(), ' ');
      body += '\n';
    } else {
      body += line;
      body += '\n';
    }
    offset += line.size() + 1;
  }
  if (!header) return parse_formula(body);
  return {parse_formula(body, declared), declared};
}

std::string format_formula_file(const Formula& f, const std::vector<VarId>& free) {
  Printer printer(f, free);
  std::string out = "; free:";
  for (VarId x : free) {
    out += ' ';
    out += printer.name(x);
  }
  out += '\n';
  printer.print(f, out);
  out += '\n';
  return out;
}

}  // namespace affmetric
