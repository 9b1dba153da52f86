#pragma once

// Internal state of gibbs::Engine, shared by the engine_*.cpp files.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gibbs/engine.hpp"
#include "gibbs/error.hpp"

namespace gibbs {

/// A composition context: atoms read inside it stand for objects of `frame`,
/// itself read in `parent`. Transparent contexts come from atom-multiplicative
/// reweighting and leave no carrier behind.
struct Ctx {
  ExprPtr frame;
  const Ctx* parent = nullptr;
  bool transparent = false;
  int level = 0;
  bool invariant = true;
  int depth = 0;
};

/// Weighted list of objects of one size.
using Listing = std::vector<std::pair<Object, Rational>>;

struct SetPlan {
  long double total = 0;           // sum of the Poisson rates
  std::vector<long double> cumulative;  // cumulative rates over cycle lengths 1..K
};

struct HomogeneityInfo {
  bool homogeneous = false;
  BigInt count;    // orbits of nonzero weight
  Rational weight; // common weight when homogeneous
};

/// One cycle-index term of a TABLE object read in a composition context:
/// coeff * prod_l A^{(p i_l)}(z^{i_l}), expanded online.
struct TableTerm {
  Rational coeff;
  std::vector<unsigned> cycles;               // i_l, one per factor
  std::vector<std::vector<Rational>> partial; // partial[l] = product of factors 0..l
};

struct Node {
  const Expr* e = nullptr;
  const Ctx* ctx = nullptr;
  unsigned p = 1;

  std::vector<Rational> c;  // coefficients computed so far
  bool busy = false;

  std::vector<Node*> kids;     // resolved children, lazily
  std::vector<Node*> powered;  // SET: powered[k] = element node at power p k
  std::vector<Rational> ell;   // SET: ell[m] = sum_{k | m} (m/k) s^{(pk)}_{m/k}

  // Unranking.
  std::map<std::size_t, std::vector<Rational>> cumulative;
  std::vector<std::vector<Rational>> hblock;  // SET: hblock[s][j]
  std::vector<std::vector<Rational>> mtab;    // SET: mtab[m][s] for s <= m
  std::map<std::size_t, HomogeneityInfo> homogeneity;

  // Enumeration.
  std::map<std::size_t, Listing> listed;

  // TABLE in a composition context.
  std::optional<std::vector<TableTerm>> table_terms;
  Rational table_constant;  // weight of atom-free entries

  // Float evaluation and sampling.
  std::optional<TruncatedSeries> eval_series;
  std::map<long double, Evaluation> evaluations;
  std::map<long double, long double> branch_prob;  // UNION, MARKED_SUM
  std::map<long double, SetPlan> set_plans;
  std::map<long double, std::vector<long double>> table_plans;
};

struct NodeKey {
  const Expr* e;
  const Ctx* ctx;
  unsigned p;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::uint64_t h = reinterpret_cast<std::uintptr_t>(k.e);
    h = h * 0x9e3779b97f4a7c15ULL ^ reinterpret_cast<std::uintptr_t>(k.ctx);
    h = h * 0x9e3779b97f4a7c15ULL ^ k.p;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Unranking result: the object, its weight, and the offset of the target
/// inside the object's cell, in [0, weight).
struct Pick {
  Object obj;
  Rational w;
  Rational r;
};

struct DrawState {
  Rng* rng = nullptr;
  std::size_t size = 0;
  std::size_t budget = 0;
  const Ctx* hook_ctx = nullptr;
  const std::function<void(unsigned, const Object&)>* hook = nullptr;
};

struct BudgetHit {};

inline constexpr int kMaxContextDepth = 64;

struct Engine::Impl {
  Impl(SpeciesSpec s, std::size_t trunc);

  SpeciesSpec spec;
  std::size_t eval_truncation;
  std::recursive_mutex mu;

  ExprPtr star_ = build::star();
  ExprPtr zero_ = build::zero();
  ExprPtr atom_ = build::atom();

  // Lowering of source expressions into the internal form.
  std::unordered_map<const Expr*, std::pair<ExprPtr, ExprPtr>> lowered;
  std::unordered_map<std::string, ExprPtr> core_defs;
  std::map<std::pair<std::string, const Expr*>, std::string> derived_names;
  std::map<std::pair<const Expr*, const Expr*>, std::pair<ExprPtr, ExprPtr>> derivatives;
  std::unordered_map<const Expr*, bool> invariants;
  std::vector<ExprPtr> keep;  // owners of pointers used as memo keys
  std::size_t fresh = 0;

  std::map<std::pair<const Expr*, const Ctx*>, std::unique_ptr<Ctx>> contexts;
  std::unordered_map<NodeKey, std::unique_ptr<Node>, NodeKeyHash> nodes;

  // engine_lower.cpp
  ExprPtr lower(const ExprPtr& source);
  ExprPtr derivative(const ExprPtr& e, const ExprPtr& h);
  const ExprPtr& body(const std::string& name);
  bool invariant(const Expr* e);
  void validate_table(const ExprPtr& domain, const std::vector<TableEntry>& entries);

  // engine_count.cpp
  const Ctx* push(const ExprPtr& frame, const Ctx* parent);
  Node* node(const Expr* e, const Ctx* ctx, unsigned p);
  Node* kid(Node* nd, std::size_t i);
  Node* powered(Node* nd, unsigned k);
  const Rational& coeff(Node* nd, std::size_t n);
  Rational compute(Node* nd, std::size_t n);
  Rational product_coeff(Node* a, Node* b, std::size_t n);
  Rational table_in_context(Node* nd, std::size_t n);
  Node* root_node(const ExprPtr& source, unsigned p);

  // engine_enumerate.cpp
  const Listing& listing(Node* nd, std::size_t n);

  // engine_unrank.cpp
  Pick unrank(Node* nd, std::size_t n, const Rational& t);
  Pick unrank_pair(Node* first, Node* second, Node* owner, std::size_t n, const Rational& t,
                   std::pair<Object, Object>& parts);
  Pick unrank_set(Node* nd, std::size_t n, const Rational& t);
  std::vector<Object> unrank_block(Node* nd, std::size_t s, std::size_t j, const Rational& t,
                                   Rational& w, Rational& r);
  const Rational& set_table(Node* nd, std::size_t m, std::size_t s);
  const Rational& block_count(Node* nd, std::size_t s, std::size_t j);
  const HomogeneityInfo& homogeneity(Node* nd, std::size_t s);

  // engine_boltzmann.cpp
  const Evaluation& evaluation(Node* nd, long double x);
  Object draw(Node* nd, long double x, unsigned mult, DrawState& st);
  const SetPlan& set_plan(Node* nd, long double x);
};

}  // namespace gibbs
