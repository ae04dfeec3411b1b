#include "ascr/formula.hpp"

#include <algorithm>
#include <cctype>

namespace ascr {

namespace {

struct Token {
  enum Kind { ident, number, symbol, end } kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalpha(c) || c == '_' || c == '.') {
      const std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '.')) ++i;
      out.push_back({Token::ident, s.substr(start, i - start), start});
    } else if (std::isdigit(c)) {
      const std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Token::number, s.substr(start, i - start), start});
    } else if (std::string("~+:(),=").find(static_cast<char>(c)) != std::string::npos) {
      out.push_back({Token::symbol, std::string(1, static_cast<char>(c)), i});
      ++i;
    } else {
      throw FormulaError(std::string("unexpected character '") + static_cast<char>(c) + "'", i);
    }
  }
  out.push_back({Token::end, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, std::span<const std::string> covariates)
      : tokens_(tokenize(text)), covariates_(covariates) {}

  ModelFormula parse() {
    expect_ident("D");
    expect_symbol("~");
    ModelFormula f;
    f.terms.push_back(Term{});
    parse_term(f);
    while (peek().kind == Token::symbol && peek().text == "+") {
      next();
      parse_term(f);
    }
    if (peek().kind != Token::end) throw FormulaError("expected '+' or end of formula", peek().pos);
    return f;
  }

 private:
  const Token& peek() const { return tokens_[index_]; }
  const Token& next() { return tokens_[index_++]; }

  void expect_symbol(const char* sym) {
    const Token& t = next();
    if (t.kind != Token::symbol || t.text != sym) {
      throw FormulaError(std::string("expected '") + sym + "'", t.pos);
    }
  }
  void expect_ident(const char* name) {
    const Token& t = next();
    if (t.kind != Token::ident || t.text != name) {
      throw FormulaError(std::string("expected '") + name + "'", t.pos);
    }
  }
  const Token& expect_kind(Token::Kind kind, const char* what) {
    const Token& t = next();
    if (t.kind != kind) throw FormulaError(std::string("expected ") + what, t.pos);
    return t;
  }

  bool known(const std::string& name) const {
    return std::find(covariates_.begin(), covariates_.end(), name) != covariates_.end();
  }

  std::string require_covariate(const Token& t) const {
    if (!known(t.text)) throw FormulaError("unknown covariate '" + t.text + "'", t.pos);
    return t.text;
  }

  void add(ModelFormula& f, Term term, std::size_t pos) {
    if (term.kind == TermKind::intercept) return;  // implicit intercept already present
    if (std::find(f.terms.begin(), f.terms.end(), term) != f.terms.end()) {
      throw FormulaError("duplicate term '" + to_string(term) + "'", pos);
    }
    f.terms.push_back(std::move(term));
  }

  void parse_term(ModelFormula& f) {
    const Token& t = next();
    if (t.kind == Token::number) {
      if (t.text != "1") throw FormulaError("only '1' is allowed as a numeric term", t.pos);
      add(f, Term{}, t.pos);
      return;
    }
    if (t.kind != Token::ident) throw FormulaError("expected a term", t.pos);
    if (t.text == "s" && peek().kind == Token::symbol && peek().text == "(") {
      parse_smooth(f, t.pos);
      return;
    }
    if (peek().kind == Token::symbol && peek().text == ":") {
      next();
      const Token& second = expect_kind(Token::ident, "covariate name after ':'");
      add(f, Term{TermKind::interaction, require_covariate(t), require_covariate(second), 1}, t.pos);
      return;
    }
    add(f, resolve_name(t), t.pos);
  }

  Term resolve_name(const Token& t) const {
    const std::string& name = t.text;
    if (known(name)) return Term{TermKind::linear, name, "", 1};
    if (name.size() > 1 && (name.back() == '2' || name.back() == '3')) {
      const std::string base = name.substr(0, name.size() - 1);
      if (known(base)) return Term{TermKind::power, base, "", name.back() - '0'};
    }
    if (name.size() > 3 && name.compare(0, 3, "log") == 0 && known(name.substr(3))) {
      return Term{TermKind::log, name.substr(3), "", 1};
    }
    throw FormulaError("unknown covariate '" + name + "'", t.pos);
  }

  void parse_smooth(ModelFormula& f, std::size_t pos) {
    expect_symbol("(");
    const Token& cov = expect_kind(Token::ident, "covariate name in s()");
    const std::string name = require_covariate(cov);
    int k = -1;
    while (peek().kind == Token::symbol && peek().text == ",") {
      next();
      const Token& key = expect_kind(Token::ident, "argument name in s()");
      expect_symbol("=");
      const Token& value = next();
      if (key.text == "k") {
        if (value.kind != Token::number) throw FormulaError("k must be an integer", value.pos);
        k = std::stoi(value.text);
        if (k < 3) throw FormulaError("smooth basis size k must be at least 3", value.pos);
      } else if (key.text == "fx") {
        if (value.kind != Token::ident || (value.text != "TRUE" && value.text != "T")) {
          throw FormulaError("only fixed-df smooths (fx = TRUE) are supported", value.pos);
        }
      } else {
        throw FormulaError("unsupported smooth argument '" + key.text + "'", key.pos);
      }
    }
    expect_symbol(")");
    if (k < 0) throw FormulaError("smooth term requires k", pos);
    add(f, Term{TermKind::smooth, name, "", k}, pos);
  }

  std::vector<Token> tokens_;
  std::span<const std::string> covariates_;
  std::size_t index_ = 0;
};

}  // namespace

ModelFormula parse_formula(const std::string& text, std::span<const std::string> covariates) {
  return Parser(text, covariates).parse();
}

std::string to_string(const Term& term) {
  switch (term.kind) {
    case TermKind::intercept:
      return "1";
    case TermKind::linear:
      return term.covariate;
    case TermKind::power:
      return term.covariate + std::to_string(term.order);
    case TermKind::log:
      return "log" + term.covariate;
    case TermKind::smooth:
      return "s(" + term.covariate + ", k = " + std::to_string(term.order) + ", fx = TRUE)";
    case TermKind::interaction:
      return term.covariate + ":" + term.covariate2;
  }
  return {};
}

std::string to_string(const ModelFormula& formula) {
  std::string out = "D ~ ";
  if (formula.intercept_only()) return out + "1";
  bool first = true;
  for (const Term& t : formula.terms) {
    if (t.kind == TermKind::intercept) continue;
    if (!first) out += " + ";
    out += to_string(t);
    first = false;
  }
  return out;
}

std::vector<std::string> referenced_covariates(const ModelFormula& formula) {
  std::vector<std::string> out;
  auto push = [&](const std::string& n) {
    if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  for (const Term& t : formula.terms) {
    push(t.covariate);
    push(t.covariate2);
  }
  return out;
}

}  // namespace ascr
