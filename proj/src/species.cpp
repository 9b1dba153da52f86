#include "gibbs/species.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "gibbs/error.hpp"

namespace gibbs {

namespace build {
namespace {
ExprPtr make(Op op, std::vector<ExprPtr> args = {}) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  return e;
}
}  // namespace

ExprPtr atom() { return make(Op::kAtom); }
ExprPtr epsilon() { return make(Op::kEpsilon); }
ExprPtr star() { return make(Op::kStar); }
ExprPtr zero() { return make(Op::kZero); }
ExprPtr set(ExprPtr s) { return make(Op::kSet, {std::move(s)}); }
ExprPtr seq(ExprPtr s) { return make(Op::kSeq, {std::move(s)}); }
ExprPtr union_of(ExprPtr a, ExprPtr b) { return make(Op::kUnion, {std::move(a), std::move(b)}); }
ExprPtr product(ExprPtr a, ExprPtr b) { return make(Op::kProduct, {std::move(a), std::move(b)}); }
ExprPtr compose(ExprPtr f, ExprPtr g) { return make(Op::kCompose, {std::move(f), std::move(g)}); }
ExprPtr derive(ExprPtr f) { return make(Op::kDerive, {std::move(f)}); }

ExprPtr ref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kRef;
  e->name = std::move(name);
  return e;
}

ExprPtr weighted(ExprPtr s, WeightModel w) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kWeighted;
  e->args = {std::move(s)};
  e->weight = std::move(w);
  return e;
}

ExprPtr scale(Rational c, ExprPtr s) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kScale;
  e->args = {std::move(s)};
  e->factor = std::move(c);
  return e;
}

ExprPtr table(std::vector<TableEntry> entries) {
  auto e = std::make_shared<Expr>();
  e->op = Op::kTable;
  e->table = std::move(entries);
  return e;
}

ExprPtr escape(ExprPtr s) { return make(Op::kEscape, {std::move(s)}); }
ExprPtr marked_set(ExprPtr set_expr, ExprPtr derived) {
  return make(Op::kMarkedSet, {std::move(set_expr), std::move(derived)});
}
ExprPtr marked_seq(ExprPtr seq_expr, ExprPtr derived_then_seq) {
  return make(Op::kMarkedSeq, {std::move(seq_expr), std::move(derived_then_seq)});
}
ExprPtr marked_sum(ExprPtr a, ExprPtr b) { return make(Op::kMarkedSum, {std::move(a), std::move(b)}); }
}  // namespace build

WeightModel atom_multiplicative(const Rational& c) {
  if (sgn(c) <= 0) throw SpecError("ATOM_MULTIPLICATIVE needs a positive factor, got " + to_string(c));
  WeightModel w;
  w.kind = WeightModel::Kind::kAtomMultiplicative;
  w.factor = c;
  return w;
}

WeightModel table_weights(const std::vector<std::pair<std::string, Rational>>& entries) {
  WeightModel w;
  w.kind = WeightModel::Kind::kTable;
  std::set<std::string> seen;
  for (const auto& [k, weight] : entries) {
    if (sgn(weight) < 0) throw SpecError("negative TABLE weight for '" + k + "'");
    UnlabelledObject o = canonicalize(parse_key(k));
    if (o.tree().has_star()) throw SpecError("TABLE entry '" + k + "' contains a placeholder");
    if (!seen.insert(o.key()).second) throw SpecError("duplicate TABLE entry '" + o.key() + "'");
    w.table.push_back({o.tree(), o.key(), weight});
  }
  std::sort(w.table.begin(), w.table.end(),
            [](const TableEntry& a, const TableEntry& b) { return a.key < b.key; });
  return w;
}

namespace {

void print(const Expr& e, std::string& out) {
  auto unary = [&](const char* name) {
    out += name;
    out += '(';
    print(*e.args.at(0), out);
    out += ')';
  };
  auto binary = [&](const char* name) {
    out += name;
    out += '(';
    print(*e.args.at(0), out);
    out += ", ";
    print(*e.args.at(1), out);
    out += ')';
  };
  switch (e.op) {
    case Op::kAtom:
      out += "ATOM";
      return;
    case Op::kEpsilon:
      out += "EPSILON";
      return;
    case Op::kSet:
      unary("SET");
      return;
    case Op::kSeq:
      unary("SEQ");
      return;
    case Op::kUnion:
      out += '(';
      print(*e.args.at(0), out);
      out += " + ";
      print(*e.args.at(1), out);
      out += ')';
      return;
    case Op::kProduct:
      out += '(';
      print(*e.args.at(0), out);
      out += " * ";
      print(*e.args.at(1), out);
      out += ')';
      return;
    case Op::kCompose:
      binary("COMPOSE");
      return;
    case Op::kDerive:
      unary("DERIVE");
      return;
    case Op::kRef:
      out += e.name;
      return;
    case Op::kWeighted: {
      out += "WEIGHTED(";
      print(*e.args.at(0), out);
      out += ", ";
      switch (e.weight.kind) {
        case WeightModel::Kind::kUnit:
          out += "UNIT";
          break;
        case WeightModel::Kind::kAtomMultiplicative:
          out += "ATOM_MULTIPLICATIVE(" + to_string(e.weight.factor) + ")";
          break;
        case WeightModel::Kind::kTable:
          out += "TABLE(";
          for (std::size_t i = 0; i < e.weight.table.size(); ++i) {
            if (i > 0) out += ", ";
            out += "\"" + e.weight.table[i].key + "\": " + to_string(e.weight.table[i].weight);
          }
          out += ")";
          break;
      }
      out += ')';
      return;
    }
    case Op::kStar:
      out += "STAR";
      return;
    case Op::kZero:
      out += "ZERO";
      return;
    case Op::kScale:
      out += "SCALE(" + to_string(e.factor) + ", ";
      print(*e.args.at(0), out);
      out += ')';
      return;
    case Op::kTable:
      out += "TABLE_SPECIES(" + std::to_string(e.table.size()) + " objects)";
      return;
    case Op::kEscape:
      unary("ESCAPE");
      return;
    case Op::kMarkedSet:
      binary("MARKED_SET");
      return;
    case Op::kMarkedSeq:
      binary("MARKED_SEQ");
      return;
    case Op::kMarkedSum:
      binary("MARKED_SUM");
      return;
  }
}

// ---------------------------------------------------------------------------
// Text language.

struct Token {
  enum class Kind { kName, kNumber, kString, kPunct, kAssign, kEnd } kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t{Token::Kind::kEnd, "", line_, col_};
      if (pos_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      char c = s_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                    s_[pos_] == '_' || s_[pos_] == '\'')) {
          t.text += advance();
        }
        t.kind = Token::Kind::kName;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          t.text += advance();
        }
        t.kind = Token::Kind::kNumber;
      } else if (c == '"') {
        advance();
        while (pos_ < s_.size() && s_[pos_] != '"') {
          if (s_[pos_] == '\n') break;
          t.text += advance();
        }
        if (pos_ >= s_.size() || s_[pos_] != '"') {
          throw SpecError(where(t.line, t.column) + "unterminated string");
        }
        advance();
        t.kind = Token::Kind::kString;
      } else if (c == ':' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') {
        advance();
        advance();
        t.kind = Token::Kind::kAssign;
        t.text = ":=";
      } else if (std::string_view("()+*,;:/-").find(c) != std::string_view::npos) {
        t.text = std::string(1, advance());
        t.kind = Token::Kind::kPunct;
      } else {
        throw SpecError(where(line_, col_) + "unexpected character '" + std::string(1, c) + "'");
      }
      out.push_back(std::move(t));
    }
  }

  static std::string where(int line, int column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
  }

 private:
  char advance() {
    char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "ATOM", "EPSILON", "SET", "SEQ", "COMPOSE", "DERIVE", "UNION", "PRODUCT", "WEIGHTED",
      "RECURSIVE", "UNIT", "ATOM_MULTIPLICATIVE", "TABLE"};
  return k;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, SpeciesSpec& spec) : t_(std::move(tokens)), spec_(spec) {}

  void run() {
    std::string last;
    bool bare_root = false;
    while (peek().kind != Token::Kind::kEnd) {
      if (peek().kind == Token::Kind::kName && t_[i_ + 1].kind == Token::Kind::kAssign) {
        Token name = next();
        if (keywords().count(name.text)) fail(name, "'" + name.text + "' is reserved");
        next();
        define(name, expr());
        last = name.text;
      } else {
        if (bare_root) fail(peek(), "only one unnamed expression is allowed");
        Token start = peek();
        ExprPtr e = expr();
        Token fake{Token::Kind::kName, "_root", start.line, start.column};
        define(fake, e);
        last = "_root";
        bare_root = true;
      }
      if (peek().kind == Token::Kind::kPunct && peek().text == ";") {
        next();
      } else if (peek().kind != Token::Kind::kEnd) {
        fail(peek(), "expected ';' between definitions");
      }
    }
    if (last.empty()) fail(peek(), "empty specification");
    spec_.set_root(spec_.has_definition("MODEL") ? "MODEL" : last);
    for (const auto& [name, tok] : refs_) {
      if (!spec_.has_definition(name)) fail(tok, "undefined name '" + name + "'");
    }
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& what) const {
    throw SpecError(Lexer::where(t.line, t.column) + what);
  }

  const Token& peek() const { return t_[i_]; }
  Token next() { return t_[i_ < t_.size() - 1 ? i_++ : i_]; }

  bool accept(const char* punct) {
    if (peek().kind == Token::Kind::kPunct && peek().text == punct) {
      ++i_;
      return true;
    }
    return false;
  }

  void expect(const char* punct) {
    if (!accept(punct)) {
      std::string got = peek().kind == Token::Kind::kEnd ? "end of input" : "'" + peek().text + "'";
      fail(peek(), std::string("expected '") + punct + "', got " + got);
    }
  }

  void define(const Token& name, ExprPtr body) {
    if (spec_.has_definition(name.text)) fail(name, "'" + name.text + "' is defined twice");
    spec_.define(name.text, std::move(body));
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (accept("+")) e = build::union_of(e, term());
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (accept("*")) e = build::product(e, factor());
    return e;
  }

  ExprPtr optional_argument() {
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    return build::atom();
  }

  Rational rational() {
    Token start = peek();
    std::string text;
    if (accept("-")) text += "-";
    if (peek().kind != Token::Kind::kNumber) fail(peek(), "expected a number");
    text += next().text;
    if (accept("/")) {
      if (peek().kind != Token::Kind::kNumber) fail(peek(), "expected a denominator");
      text += "/" + next().text;
    }
    try {
      return parse_rational(text);
    } catch (const Error& e) {
      fail(start, e.what());
    }
  }

  WeightModel weight() {
    Token t = next();
    if (t.kind != Token::Kind::kName) fail(t, "expected a weight model");
    try {
      if (t.text == "UNIT") return WeightModel{};
      if (t.text == "ATOM_MULTIPLICATIVE") {
        expect("(");
        Rational c = rational();
        expect(")");
        return atom_multiplicative(c);
      }
      if (t.text == "TABLE") {
        expect("(");
        std::vector<std::pair<std::string, Rational>> entries;
        if (!accept(")")) {
          do {
            if (peek().kind != Token::Kind::kString) fail(peek(), "expected a quoted object key");
            std::string key = next().text;
            expect(":");
            entries.emplace_back(key, rational());
          } while (accept(","));
          expect(")");
        }
        return table_weights(entries);
      }
    } catch (const SpecError& e) {
      if (std::string(e.what()).find("line ") != std::string::npos) throw;
      fail(t, e.what());
    }
    fail(t, "unknown weight model '" + t.text + "'");
  }

  ExprPtr factor() {
    Token t = next();
    if (t.kind == Token::Kind::kPunct && t.text == "(") {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Token::Kind::kName) {
      fail(t, t.kind == Token::Kind::kEnd ? "unexpected end of input"
                                          : "unexpected '" + t.text + "'");
    }
    const std::string& w = t.text;
    if (w == "ATOM") return build::atom();
    if (w == "EPSILON") return build::epsilon();
    if (w == "SET") return build::set(optional_argument());
    if (w == "SEQ") return build::seq(optional_argument());
    if (w == "DERIVE") {
      expect("(");
      ExprPtr f = expr();
      expect(")");
      return build::derive(f);
    }
    if (w == "COMPOSE" || w == "UNION" || w == "PRODUCT") {
      expect("(");
      ExprPtr a = expr();
      expect(",");
      ExprPtr b = expr();
      expect(")");
      if (w == "COMPOSE") return build::compose(a, b);
      if (w == "UNION") return build::union_of(a, b);
      return build::product(a, b);
    }
    if (w == "WEIGHTED") {
      expect("(");
      ExprPtr s = expr();
      expect(",");
      WeightModel m = weight();
      expect(")");
      return build::weighted(s, std::move(m));
    }
    if (w == "RECURSIVE") {
      expect("(");
      Token name = next();
      if (name.kind != Token::Kind::kName || keywords().count(name.text)) {
        fail(name, "expected a definition name");
      }
      expect(",");
      ExprPtr body = expr();
      expect(")");
      define(name, body);
      return build::ref(name.text);
    }
    if (keywords().count(w)) fail(t, "'" + w + "' cannot start an expression");
    refs_.emplace_back(w, t);
    return build::ref(w);
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
  SpeciesSpec& spec_;
  std::vector<std::pair<std::string, Token>> refs_;
};

// ---------------------------------------------------------------------------
// JSON form.

ExprPtr expr_from_json(const nlohmann::json& j, const std::string& path);

ExprPtr arg_at(const nlohmann::json& j, std::size_t i, const std::string& path) {
  if (!j.contains("args") || !j["args"].is_array() || j["args"].size() <= i) {
    throw SpecError(path + ": missing argument " + std::to_string(i));
  }
  return expr_from_json(j["args"][i], path + "/args/" + std::to_string(i));
}

Rational rational_from_json(const nlohmann::json& j, const std::string& path) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
  } catch (const Error& e) {
    throw SpecError(path + ": " + e.what());
  }
  throw SpecError(path + ": expected a rational as \"p/q\" or an integer");
}

WeightModel weight_from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "UNIT") return WeightModel{};
  if (!j.is_object() || !j.contains("model")) throw SpecError(path + ": expected a weight model");
  std::string model = j["model"].get<std::string>();
  if (model == "UNIT") return WeightModel{};
  if (model == "ATOM_MULTIPLICATIVE") return atom_multiplicative(rational_from_json(j.value("c", nlohmann::json()), path + "/c"));
  if (model == "TABLE") {
    std::vector<std::pair<std::string, Rational>> entries;
    const auto& list = j.value("entries", nlohmann::json::array());
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string p = path + "/entries/" + std::to_string(i);
      entries.emplace_back(list[i].at("key").get<std::string>(), rational_from_json(list[i].at("weight"), p));
    }
    return table_weights(entries);
  }
  throw SpecError(path + ": unknown weight model '" + model + "'");
}

ExprPtr expr_from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "ATOM") return build::atom();
    if (s == "EPSILON") return build::epsilon();
    if (s == "SET") return build::set(build::atom());
    if (s == "SEQ") return build::seq(build::atom());
    throw SpecError(path + ": unknown expression '" + s + "'");
  }
  if (!j.is_object()) throw SpecError(path + ": expected an expression");
  if (j.contains("ref")) return build::ref(j["ref"].get<std::string>());
  if (!j.contains("op")) throw SpecError(path + ": missing \"op\"");
  std::string op = j["op"].get<std::string>();
  std::size_t nargs = j.contains("args") ? j["args"].size() : 0;
  if (op == "ATOM") return build::atom();
  if (op == "EPSILON") return build::epsilon();
  if (op == "SET") return build::set(nargs ? arg_at(j, 0, path) : build::atom());
  if (op == "SEQ") return build::seq(nargs ? arg_at(j, 0, path) : build::atom());
  if (op == "DERIVE") return build::derive(arg_at(j, 0, path));
  if (op == "COMPOSE") return build::compose(arg_at(j, 0, path), arg_at(j, 1, path));
  if (op == "UNION") return build::union_of(arg_at(j, 0, path), arg_at(j, 1, path));
  if (op == "PRODUCT") return build::product(arg_at(j, 0, path), arg_at(j, 1, path));
  if (op == "WEIGHTED") {
    return build::weighted(arg_at(j, 0, path),
                           weight_from_json(j.value("weight", nlohmann::json()), path + "/weight"));
  }
  throw SpecError(path + ": unknown op '" + op + "'");
}

nlohmann::json expr_to_json(const Expr& e) {
  using nlohmann::json;
  auto args = [&]() {
    json a = json::array();
    for (const auto& x : e.args) a.push_back(expr_to_json(*x));
    return a;
  };
  switch (e.op) {
    case Op::kAtom:
      return "ATOM";
    case Op::kEpsilon:
      return "EPSILON";
    case Op::kRef:
      return json{{"ref", e.name}};
    case Op::kSet:
      return json{{"op", "SET"}, {"args", args()}};
    case Op::kSeq:
      return json{{"op", "SEQ"}, {"args", args()}};
    case Op::kUnion:
      return json{{"op", "UNION"}, {"args", args()}};
    case Op::kProduct:
      return json{{"op", "PRODUCT"}, {"args", args()}};
    case Op::kCompose:
      return json{{"op", "COMPOSE"}, {"args", args()}};
    case Op::kDerive:
      return json{{"op", "DERIVE"}, {"args", args()}};
    case Op::kWeighted: {
      json w;
      switch (e.weight.kind) {
        case WeightModel::Kind::kUnit:
          w = {{"model", "UNIT"}};
          break;
        case WeightModel::Kind::kAtomMultiplicative:
          w = {{"model", "ATOM_MULTIPLICATIVE"}, {"c", to_string(e.weight.factor)}};
          break;
        case WeightModel::Kind::kTable: {
          json entries = json::array();
          for (const auto& t : e.weight.table) {
            entries.push_back({{"key", t.key}, {"weight", to_string(t.weight)}});
          }
          w = {{"model", "TABLE"}, {"entries", entries}};
          break;
        }
      }
      return json{{"op", "WEIGHTED"}, {"args", args()}, {"weight", w}};
    }
    default:
      throw Unsupported("internal expression forms have no JSON encoding");
  }
}

void collect_refs(const Expr& e, std::set<std::string>& out) {
  if (e.op == Op::kRef) out.insert(e.name);
  for (const auto& a : e.args) collect_refs(*a, out);
}

}  // namespace

std::string to_dsl(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

SpeciesSpec SpeciesSpec::parse(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
      int line = 1, column = 1;
      for (std::size_t i = 0; i < at; ++i) {
        if (text[i] == '\n') {
          ++line;
          column = 1;
        } else {
          ++column;
        }
      }
      throw SpecError(Lexer::where(line, column) + "invalid JSON");
    }
    return from_json(j);
  }
  SpeciesSpec spec;
  Parser(Lexer(text).run(), spec).run();
  spec.validate();
  return spec;
}

SpeciesSpec SpeciesSpec::from_json(const nlohmann::json& j) {
  SpeciesSpec spec;
  if (!j.is_object() || !j.contains("definitions")) {
    throw SpecError("JSON spec needs a \"definitions\" member");
  }
  const auto& defs = j["definitions"];
  try {
    if (defs.is_array()) {
      for (std::size_t i = 0; i < defs.size(); ++i) {
        std::string name = defs[i].at("name").get<std::string>();
        if (spec.has_definition(name)) throw SpecError("'" + name + "' is defined twice");
        spec.define(name, expr_from_json(defs[i].at("expr"), "/definitions/" + std::to_string(i) + "/expr"));
      }
    } else if (defs.is_object()) {
      for (const auto& [name, body] : defs.items()) {
        spec.define(name, expr_from_json(body, "/definitions/" + name));
      }
    } else {
      throw SpecError("\"definitions\" must be an array or an object");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed JSON spec: ") + e.what());
  }
  if (spec.order_.empty()) throw SpecError("empty specification");
  std::string root = j.value("root", std::string());
  if (root.empty()) root = spec.has_definition("MODEL") ? "MODEL" : spec.order_.back();
  spec.set_root(root);
  spec.validate();
  return spec;
}

SpeciesSpec SpeciesSpec::from_expr(ExprPtr root, std::vector<std::pair<std::string, ExprPtr>> defs) {
  SpeciesSpec spec;
  for (auto& [name, body] : defs) spec.define(name, std::move(body));
  std::string name = "_root";
  spec.define(name, std::move(root));
  spec.set_root(name);
  spec.validate();
  return spec;
}

void SpeciesSpec::define(const std::string& name, ExprPtr body) {
  if (!defs_.count(name)) order_.push_back(name);
  defs_[name] = std::move(body);
}

void SpeciesSpec::set_root(const std::string& name) { root_ = name; }

ExprPtr SpeciesSpec::root() const {
  if (root_.empty()) throw SpecError("specification has no root");
  return build::ref(root_);
}

ExprPtr SpeciesSpec::definition(const std::string& name) const {
  auto it = defs_.find(name);
  if (it == defs_.end()) throw SpecError("undefined name '" + name + "'");
  return it->second;
}

void SpeciesSpec::validate() const {
  if (!defs_.count(root_)) throw SpecError("root '" + root_ + "' is not defined");
  for (const auto& [name, body] : defs_) {
    std::set<std::string> refs;
    collect_refs(*body, refs);
    for (const auto& r : refs) {
      if (!defs_.count(r)) throw SpecError("definition '" + name + "' uses undefined name '" + r + "'");
    }
  }
}

std::string SpeciesSpec::to_dsl() const {
  std::string out;
  auto emit = [&](const std::string& name) {
    out += name + " := " + gibbs::to_dsl(*defs_.at(name)) + ";\n";
  };
  for (const auto& name : order_) {
    if (name != root_) emit(name);
  }
  emit(root_);
  return out;
}

nlohmann::json SpeciesSpec::to_json() const {
  nlohmann::json defs = nlohmann::json::array();
  for (const auto& name : order_) {
    defs.push_back({{"name", name}, {"expr", expr_to_json(*defs_.at(name))}});
  }
  return {{"root", root_}, {"definitions", defs}};
}

std::uint64_t SpeciesSpec::digest() const { return fnv1a64(to_dsl()); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace gibbs
