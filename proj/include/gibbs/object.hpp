#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gibbs/cycle_index.hpp"

namespace gibbs {

enum class NodeKind : unsigned char {
  kAtom,     // "o"
  kStar,     // "*": the placeholder of a derived structure, size 0
  kEpsilon,  // "e"
  kSet,      // "{a,b,...}" with children sorted by key
  kSeq,      // "[a,b,...]"
  kProduct,  // "(a,b)"
  kUnion,    // "<i|a>" with tag = branch index
  kCarrier,  // an outer atom carrying an inner object; tag = nesting level
};

/// Structured unlabelled object. Carriers mark where a composition attached
/// an inner object; they are invisible in the key but let callers locate
/// the components of a composite structure.
struct Object {
  NodeKind kind = NodeKind::kAtom;
  int tag = 0;
  std::vector<Object> children;

  static Object atom() { return {NodeKind::kAtom, 0, {}}; }
  static Object star() { return {NodeKind::kStar, 0, {}}; }
  static Object epsilon() { return {NodeKind::kEpsilon, 0, {}}; }
  static Object carrier(int level, Object child);

  /// Number of atoms; stars and epsilons count zero.
  std::size_t size() const;
  bool has_star() const;
};

/// Canonical key. Children of sets are ordered by key, so two objects get the
/// same key exactly when they are isomorphic.
std::string key_of(const Object& o);

/// Sorts set children by key, recursively, and returns the key.
std::string canonicalize_in_place(Object& o);

/// An object in canonical form together with its key.
class UnlabelledObject {
 public:
  UnlabelledObject() = default;
  explicit UnlabelledObject(Object o);

  const Object& tree() const { return tree_; }
  const std::string& key() const { return key_; }
  std::size_t size() const { return size_; }

  bool operator==(const UnlabelledObject& other) const { return key_ == other.key_; }
  auto operator<=>(const UnlabelledObject& other) const { return key_ <=> other.key_; }

 private:
  Object tree_;
  std::string key_;
  std::size_t size_ = 0;
};

UnlabelledObject canonicalize(Object o);

/// Parses a key back into a (carrier-free) object. Throws SpecError.
Object parse_key(std::string_view key);

/// Cycle index of the automorphism group of `o` acting on its atoms, with the
/// given truncation order (at least o.size()).
CycleIndexPoly automorphism_cycle_index(const Object& o, std::size_t truncation);

/// Carriers of the given level, in depth-first order.
std::vector<const Object*> carriers_at_level(const Object& o, int level);

}  // namespace gibbs
