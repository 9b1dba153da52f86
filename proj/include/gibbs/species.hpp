#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gibbs/object.hpp"
#include "gibbs/rational.hpp"

namespace gibbs {

enum class Op {
  // Constructors of the specification language.
  kAtom,
  kEpsilon,
  kSet,
  kSeq,
  kUnion,
  kProduct,
  kCompose,   // args = {F, G}: F-structures whose atoms carry G-structures
  kDerive,
  kRef,       // a named definition, possibly recursive
  kWeighted,  // args = {S}; weight model in Expr::weight
  // Internal forms produced when derivatives and weights are lowered.
  kStar,       // the *-placeholder: one object of size 0, never substituted
  kZero,       // no objects
  kScale,      // args = {S}: every weight multiplied by Expr::factor
  kTable,      // finitely many explicit objects with explicit weights
  kEscape,     // args = {S}: S read in the enclosing composition context
  kMarkedSet,  // args = {SET(S), S'}: a set with one derived element
  kMarkedSeq,  // args = {SEQ(S), S' * SEQ(S)}
  kMarkedSum,  // args = {A, B}: disjoint union that leaves keys untagged
};

struct TableEntry {
  Object object;
  std::string key;
  Rational weight;
};

struct WeightModel {
  enum class Kind { kUnit, kAtomMultiplicative, kTable };
  Kind kind = Kind::kUnit;
  Rational factor{1};                // kAtomMultiplicative: c in c^{|F|}
  std::vector<TableEntry> table;     // kTable, sorted by key
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::kAtom;
  std::vector<ExprPtr> args;
  std::string name;      // kRef
  Rational factor{1};    // kScale
  WeightModel weight;    // kWeighted
  std::vector<TableEntry> table;  // kTable
};

namespace build {
ExprPtr atom();
ExprPtr epsilon();
ExprPtr star();
ExprPtr zero();
ExprPtr set(ExprPtr s);
ExprPtr seq(ExprPtr s);
ExprPtr union_of(ExprPtr a, ExprPtr b);
ExprPtr product(ExprPtr a, ExprPtr b);
ExprPtr compose(ExprPtr f, ExprPtr g);
ExprPtr derive(ExprPtr f);
ExprPtr ref(std::string name);
ExprPtr weighted(ExprPtr s, WeightModel w);
ExprPtr scale(Rational c, ExprPtr s);
ExprPtr table(std::vector<TableEntry> entries);
ExprPtr escape(ExprPtr s);
ExprPtr marked_set(ExprPtr set_expr, ExprPtr derived);
ExprPtr marked_seq(ExprPtr seq_expr, ExprPtr derived_then_seq);
ExprPtr marked_sum(ExprPtr a, ExprPtr b);
}  // namespace build

WeightModel atom_multiplicative(const Rational& c);
/// Entries are given as (key, weight); keys are parsed and sorted.
WeightModel table_weights(const std::vector<std::pair<std::string, Rational>>& entries);

/// Text form in the specification language.
std::string to_dsl(const Expr& e);

/// A set of named definitions and a distinguished root.
class SpeciesSpec {
 public:
  SpeciesSpec() = default;

  /// Parses the text language, or JSON when the text starts with '{'.
  /// Syntax errors carry line and column. Unknown names are rejected.
  static SpeciesSpec parse(std::string_view text);
  static SpeciesSpec from_json(const nlohmann::json& j);
  /// A spec whose root is the given expression; `defs` supplies named
  /// definitions it refers to.
  static SpeciesSpec from_expr(ExprPtr root, std::vector<std::pair<std::string, ExprPtr>> defs = {});

  void define(const std::string& name, ExprPtr body);
  void set_root(const std::string& name);

  const std::string& root_name() const { return root_; }
  ExprPtr root() const;
  /// Body of a definition; throws SpecError if unknown.
  ExprPtr definition(const std::string& name) const;
  bool has_definition(const std::string& name) const { return defs_.count(name) > 0; }
  const std::vector<std::string>& names() const { return order_; }

  std::string to_dsl() const;
  nlohmann::json to_json() const;
  /// FNV-1a 64 of the normalized text form.
  std::uint64_t digest() const;

 private:
  void validate() const;

  std::map<std::string, ExprPtr> defs_;
  std::vector<std::string> order_;
  std::string root_;
};

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace gibbs
