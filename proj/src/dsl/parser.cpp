// Copyright 2026 The probcbma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probcbma/dsl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "probcbma/error.hpp"

namespace probcbma::dsl {
namespace {

enum class Tok {
  Ident,
  Number,
  String,
  LParen,
  RParen,
  Comma,
  Dot,
  DoubleColon,
  Implies,
  Semicolon,
  And,
  Or,
  Not,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End:
      return "end of input";
    case Tok::String:
      return "string '" + t.text + "'";
    default:
      return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      int line = line_, col = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          id += advance();
        out.push_back({id == "not" ? Tok::Not : Tok::Ident, id, line, col});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '.') && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back({Tok::Number, number(), line, col});
      } else if (c == '\'' || c == '"') {
        out.push_back({Tok::String, quoted(c), line, col});
      } else {
        advance();
        switch (c) {
          case '(':
            out.push_back({Tok::LParen, "(", line, col});
            break;
          case ')':
            out.push_back({Tok::RParen, ")", line, col});
            break;
          case ',':
            out.push_back({Tok::Comma, ",", line, col});
            break;
          case '.':
            out.push_back({Tok::Dot, ".", line, col});
            break;
          case ';':
            out.push_back({Tok::Semicolon, ";", line, col});
            break;
          case '&':
            out.push_back({Tok::And, "&", line, col});
            break;
          case '|':
            out.push_back({Tok::Or, "|", line, col});
            break;
          case '!':
          case '~':
            out.push_back({Tok::Not, std::string(1, c), line, col});
            break;
          case ':':
            if (peek() == ':') {
              advance();
              out.push_back({Tok::DoubleColon, "::", line, col});
            } else if (peek() == '-') {
              advance();
              out.push_back({Tok::Implies, ":-", line, col});
            } else {
              throw ParseError("expected '::' or ':-' after ':'", line, col, file_);
            }
            break;
          default:
            throw ParseError(std::string("unexpected character '") + c + "'", line, col, file_);
        }
      }
    }
  }

 private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string number() {
    std::string s;
    if (peek() == '-') s += advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
    // A '.' is part of the number only when a digit follows; otherwise it ends a statement.
    if (peek() == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      s += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
    }
    if ((peek() == 'e' || peek() == 'E') && pos_ + 1 < src_.size()) {
      std::size_t k = pos_ + 1;
      if (src_[k] == '+' || src_[k] == '-') ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        s += advance();
        if (peek() == '+' || peek() == '-') s += advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
      }
    }
    return s;
  }

  std::string quoted(char q) {
    int line = line_, col = col_;
    advance();
    std::string s;
    for (;;) {
      if (pos_ >= src_.size()) throw ParseError("unterminated string", line, col, file_);
      char c = advance();
      if (c == q) return s;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw ParseError("unterminated string", line, col, file_);
        c = advance();
      }
      s += c;
    }
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Atom as written, before deciding whether bare identifiers are variables.
struct RawAtom {
  Token name;
  std::vector<Token> args;
};

enum class Context { Rule, Fact };

class Parser {
 public:
  Parser(std::string_view src, std::string file) : file_(std::move(file)) {
    toks_ = Lexer(src, file_).run();
  }

  Program program() {
    Program prog;
    while (cur().kind != Tok::End) statement(prog);
    return prog;
  }

  Query query() {
    Query q;
    q.target = atom(raw_atom(), Context::Rule);
    if (cur().kind == Tok::Or) {
      next();
      q.kind = QueryKind::Conditional;
      q.condition = disjunction();
    }
    expect(Tok::End, "end of query");
    return q;
  }

  Formula formula_only() {
    Formula f = disjunction();
    expect(Tok::End, "end of formula");
    return f;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& look(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column, file_);
  }

  Token expect(Tok kind, const char* what) {
    if (cur().kind != kind) fail(std::string("expected ") + what + ", found " + describe(cur()), cur());
    return next();
  }

  RawAtom raw_atom() {
    RawAtom a;
    a.name = expect(Tok::Ident, "predicate name");
    expect(Tok::LParen, "'('");
    if (cur().kind != Tok::RParen) {
      for (;;) {
        const Token& t = cur();
        if (t.kind != Tok::Ident && t.kind != Tok::Number && t.kind != Tok::String)
          fail("expected argument, found " + describe(t), t);
        a.args.push_back(next());
        if (cur().kind != Tok::Comma) break;
        next();
      }
    }
    expect(Tok::RParen, "')'");
    return a;
  }

  Atom atom(const RawAtom& raw, Context ctx) {
    Atom a;
    a.predicate = raw.name.text;
    a.loc = {raw.name.line, raw.name.column};
    for (const auto& t : raw.args) {
      if (t.kind == Tok::Ident && ctx == Context::Rule)
        a.args.push_back(Term::var(t.text));
      else
        a.args.push_back(Term::constant(t.text));
    }
    check_arity(a.predicate, a.args.size(), raw.name);
    return a;
  }

  void check_arity(const std::string& pred, std::size_t n, const Token& at) {
    auto [it, inserted] = arity_.emplace(pred, n);
    if (!inserted && it->second != n)
      throw ArityError(pred + " used with arity " + std::to_string(n) + " but earlier with arity " +
                           std::to_string(it->second),
                       at.line, at.column, file_);
  }

  double probability(const Token& t) {
    double p = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), p);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail("malformed probability " + t.text, t);
    if (!(p >= 0.0 && p <= 1.0))
      throw ProbabilityRangeError("probability " + t.text + " outside [0, 1]", t.line, t.column, file_);
    return p;
  }

  ProbTuple tuple_of(const Atom& a) {
    ProbTuple tup;
    tup.loc = a.loc;
    for (const auto& t : a.args) tup.args.push_back(t.value());
    return tup;
  }

  void add_fact(Program& prog, const Atom& a, double p) {
    if (choice_relations_.count(a.predicate))
      throw ParseError(a.predicate + " is a choice relation and cannot also hold independent facts", a.loc.line,
                       a.loc.column, file_);
    auto it = fact_index_.find(a.predicate);
    if (it == fact_index_.end()) {
      it = fact_index_.emplace(a.predicate, prog.facts.size()).first;
      prog.facts.push_back({a.predicate, a.arity(), {}});
    }
    auto& block = prog.facts[it->second];
    ProbTuple tup = tuple_of(a);
    tup.p = p;
    if (!fact_keys_[a.predicate].insert(tup.args).second)
      throw ParseError("duplicate fact " + to_string(a), a.loc.line, a.loc.column, file_);
    block.tuples.push_back(std::move(tup));
  }

  void statement(Program& prog) {
    if (cur().kind == Tok::Number && look(1).kind == Tok::DoubleColon) {
      probabilistic(prog);
      return;
    }
    RawAtom head = raw_atom();
    if (cur().kind == Tok::Dot) {
      next();
      add_fact(prog, atom(head, Context::Fact), 1.0);
      return;
    }
    Token arrow = expect(Tok::Implies, "':-' or '.'");
    DeterministicRule rule;
    rule.head = atom(head, Context::Rule);
    rule.loc = rule.head.loc;
    if (cur().kind == Tok::Ident && cur().text == "true" && look(1).kind == Tok::Dot) {
      next();
      next();
      if (!rule.head.is_ground()) fail("a rule with body true must have a ground head", arrow);
      Atom fact = atom(head, Context::Fact);
      add_fact(prog, fact, 1.0);
      return;
    }
    for (;;) {
      BodyLiteral lit;
      if (cur().kind == Tok::Not) {
        next();
        lit.negated = true;
      }
      lit.atom = atom(raw_atom(), Context::Rule);
      rule.body.push_back(std::move(lit));
      if (cur().kind != Tok::Comma && cur().kind != Tok::And) break;
      next();
    }
    expect(Tok::Dot, "'.' at end of rule");
    prog.rules.push_back(std::move(rule));
  }

  void probabilistic(Program& prog) {
    std::vector<std::pair<Atom, double>> heads;
    Token first = cur();
    for (;;) {
      Token pt = expect(Tok::Number, "probability");
      double p = probability(pt);
      expect(Tok::DoubleColon, "'::'");
      heads.emplace_back(atom(raw_atom(), Context::Fact), p);
      if (cur().kind != Tok::Semicolon) break;
      next();
    }
    if (cur().kind == Tok::Implies) {
      Token arrow = next();
      if (!(cur().kind == Tok::Ident && cur().text == "true"))
        fail("probabilistic rules must have body true", arrow);
      next();
    }
    expect(Tok::Dot, "'.' at end of statement");

    if (heads.size() == 1) {
      add_fact(prog, heads.front().first, heads.front().second);
      return;
    }
    const std::string& rel = heads.front().first.predicate;
    for (const auto& [a, p] : heads)
      if (a.predicate != rel)
        throw ParseError("all heads of a choice must use the same relation (" + rel + " vs " + a.predicate + ")",
                         a.loc.line, a.loc.column, file_);
    if (fact_index_.count(rel))
      throw ParseError(rel + " already holds independent facts and cannot be a choice", first.line, first.column,
                       file_);
    if (!choice_relations_.insert(rel).second)
      throw ParseError("choice relation " + rel + " is already defined", first.line, first.column, file_);
    ProbabilisticChoiceBlock block{rel, heads.front().first.arity(), {}, {first.line, first.column}};
    std::set<std::vector<Symbol>> seen;
    for (const auto& [a, p] : heads) {
      ProbTuple tup = tuple_of(a);
      tup.p = p;
      if (!seen.insert(tup.args).second)
        throw ParseError("duplicate choice head " + to_string(a), a.loc.line, a.loc.column, file_);
      block.tuples.push_back(std::move(tup));
    }
    prog.choices.push_back(std::move(block));
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (cur().kind == Tok::Or) {
      next();
      parts.push_back(conjunction());
    }
    return Formula::disjunction(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (cur().kind == Tok::And || cur().kind == Tok::Comma) {
      next();
      parts.push_back(unary());
    }
    return Formula::conjunction(std::move(parts));
  }

  Formula unary() {
    if (cur().kind == Tok::Not) {
      next();
      return Formula::negation(unary());
    }
    if (cur().kind == Tok::LParen) {
      next();
      Formula f = disjunction();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (cur().kind == Tok::Ident && cur().text == "true" && look(1).kind != Tok::LParen) {
      next();
      return Formula::truth();
    }
    if (cur().kind == Tok::Ident && look(1).kind == Tok::LParen) return Formula::leaf(atom(raw_atom(), Context::Fact));
    if (cur().kind == Tok::Ident || cur().kind == Tok::String || cur().kind == Tok::Number) {
      Token t = next();
      Atom a;
      a.predicate = "TermAssociation";
      a.args.push_back(Term::constant(t.text));
      a.loc = {t.line, t.column};
      check_arity(a.predicate, 1, t);
      return Formula::leaf(std::move(a));
    }
    fail("expected term, atom or '(', found " + describe(cur()), cur());
  }

  std::string file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, std::size_t> arity_;
  std::map<std::string, std::size_t> fact_index_;
  std::map<std::string, std::set<std::vector<Symbol>>> fact_keys_;
  std::set<std::string> choice_relations_;
};

}  // namespace

Program parse_program(std::string_view source, const std::string& file) {
  return Parser(source, file).program();
}

Program parse_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open program file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str(), path);
}

Query parse_query(std::string_view text) { return Parser(text, "<query>").query(); }

Formula parse_formula(std::string_view text) { return Parser(text, "<formula>").formula_only(); }

}  // namespace probcbma::dsl
