#include "gibbs/object.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "gibbs/error.hpp"

namespace gibbs {

Object Object::carrier(int level, Object child) {
  Object c{NodeKind::kCarrier, level, {}};
  c.children.push_back(std::move(child));
  return c;
}

std::size_t Object::size() const {
  if (kind == NodeKind::kAtom) return 1;
  std::size_t s = 0;
  for (const auto& c : children) s += c.size();
  return s;
}

bool Object::has_star() const {
  if (kind == NodeKind::kStar) return true;
  return std::any_of(children.begin(), children.end(), [](const Object& c) { return c.has_star(); });
}

namespace {

void append_key(const Object& o, std::string& out);

void append_children(const Object& o, std::string& out, char open, char close) {
  out += open;
  for (std::size_t i = 0; i < o.children.size(); ++i) {
    if (i > 0) out += ',';
    append_key(o.children[i], out);
  }
  out += close;
}

void append_key(const Object& o, std::string& out) {
  switch (o.kind) {
    case NodeKind::kAtom:
      out += 'o';
      return;
    case NodeKind::kStar:
      out += '*';
      return;
    case NodeKind::kEpsilon:
      out += 'e';
      return;
    case NodeKind::kCarrier:
      append_key(o.children.at(0), out);
      return;
    case NodeKind::kSeq:
      append_children(o, out, '[', ']');
      return;
    case NodeKind::kProduct:
      append_children(o, out, '(', ')');
      return;
    case NodeKind::kUnion:
      out += '<';
      out += std::to_string(o.tag);
      out += '|';
      append_key(o.children.at(0), out);
      out += '>';
      return;
    case NodeKind::kSet: {
      std::vector<std::string> keys;
      keys.reserve(o.children.size());
      for (const auto& c : o.children) keys.push_back(key_of(c));
      std::sort(keys.begin(), keys.end());
      out += '{';
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i > 0) out += ',';
        out += keys[i];
      }
      out += '}';
      return;
    }
  }
}

}  // namespace

std::string key_of(const Object& o) {
  std::string out;
  append_key(o, out);
  return out;
}

std::string canonicalize_in_place(Object& o) {
  switch (o.kind) {
    case NodeKind::kAtom:
      return "o";
    case NodeKind::kStar:
      return "*";
    case NodeKind::kEpsilon:
      return "e";
    case NodeKind::kCarrier:
      return canonicalize_in_place(o.children.at(0));
    case NodeKind::kUnion:
      return "<" + std::to_string(o.tag) + "|" + canonicalize_in_place(o.children.at(0)) + ">";
    case NodeKind::kSeq:
    case NodeKind::kProduct: {
      std::string out(1, o.kind == NodeKind::kSeq ? '[' : '(');
      for (std::size_t i = 0; i < o.children.size(); ++i) {
        if (i > 0) out += ',';
        out += canonicalize_in_place(o.children[i]);
      }
      out += o.kind == NodeKind::kSeq ? ']' : ')';
      return out;
    }
    case NodeKind::kSet: {
      std::vector<std::pair<std::string, Object>> keyed;
      keyed.reserve(o.children.size());
      for (auto& c : o.children) {
        std::string k = canonicalize_in_place(c);
        keyed.emplace_back(std::move(k), std::move(c));
      }
      std::stable_sort(keyed.begin(), keyed.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::string out = "{";
      o.children.clear();
      for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i > 0) out += ',';
        out += keyed[i].first;
        o.children.push_back(std::move(keyed[i].second));
      }
      return out + "}";
    }
  }
  return {};
}

UnlabelledObject::UnlabelledObject(Object o) : tree_(std::move(o)) {
  key_ = canonicalize_in_place(tree_);
  size_ = tree_.size();
}

UnlabelledObject canonicalize(Object o) { return UnlabelledObject(std::move(o)); }

namespace {

class KeyParser {
 public:
  explicit KeyParser(std::string_view s) : s_(s) {}

  Object parse() {
    Object o = node();
    if (pos_ != s_.size()) fail("trailing characters");
    return o;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SpecError("object key '" + std::string(s_) + "', offset " + std::to_string(pos_) +
                    ": " + what);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::vector<Object> list(char close) {
    std::vector<Object> out;
    if (peek() == close) {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(node());
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(close);
      return out;
    }
  }

  Object node() {
    char c = peek();
    ++pos_;
    switch (c) {
      case 'o':
        return Object::atom();
      case '*':
        return Object::star();
      case 'e':
        return Object::epsilon();
      case '{':
        return {NodeKind::kSet, 0, list('}')};
      case '[':
        return {NodeKind::kSeq, 0, list(']')};
      case '(': {
        Object o{NodeKind::kProduct, 0, list(')')};
        if (o.children.size() != 2) fail("a product has two factors");
        return o;
      }
      case '<': {
        std::size_t start = pos_;
        while (peek() >= '0' && peek() <= '9') ++pos_;
        if (start == pos_) fail("expected a branch index");
        int tag = std::stoi(std::string(s_.substr(start, pos_ - start)));
        expect('|');
        Object o{NodeKind::kUnion, tag, {}};
        o.children.push_back(node());
        expect('>');
        return o;
      }
      default:
        --pos_;
        fail("unexpected character");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

CycleIndexPoly aut_index(const Object& o, std::size_t n) {
  switch (o.kind) {
    case NodeKind::kAtom:
      return CycleIndexPoly::atom(n);
    case NodeKind::kStar:
    case NodeKind::kEpsilon:
      return CycleIndexPoly::one(n);
    case NodeKind::kCarrier:
    case NodeKind::kUnion:
      return aut_index(o.children.at(0), n);
    case NodeKind::kSeq:
    case NodeKind::kProduct: {
      CycleIndexPoly z = CycleIndexPoly::one(n);
      for (const auto& c : o.children) z = mul(z, aut_index(c, n));
      return z;
    }
    case NodeKind::kSet: {
      // Identical children are permuted by the symmetric group: the factor
      // for m copies of a child c is the degree-m part of Z_SET composed
      // with the automorphism index of c.
      std::map<std::string, std::pair<const Object*, unsigned>> classes;
      for (const auto& c : o.children) {
        auto& entry = classes[key_of(c)];
        entry.first = &c;
        ++entry.second;
      }
      CycleIndexPoly z = CycleIndexPoly::one(n);
      for (const auto& [k, entry] : classes) {
        const auto [child, m] = entry;
        const std::size_t child_size = child->size();
        CycleIndexPoly zc = aut_index(*child, n);
        if (child_size == 0) continue;  // only the identity acts on atom-free children
        CycleIndexPoly::Terms sm;
        const CycleIndexPoly full = z_set(m);
        for (const auto& [t, c] : full.terms()) {
          if (t.degree() == m) sm[t] = c;
        }
        auto wreath = plethysm(CycleIndexPoly::from_terms(sm, n),
                               [&](std::size_t) { return zc; });
        z = mul(z, wreath);
      }
      return z;
    }
  }
  return CycleIndexPoly::one(n);
}

void collect_carriers(const Object& o, int level, std::vector<const Object*>& out) {
  if (o.kind == NodeKind::kCarrier && o.tag == level) {
    out.push_back(&o);
    return;
  }
  for (const auto& c : o.children) collect_carriers(c, level, out);
}

}  // namespace

Object parse_key(std::string_view key) { return KeyParser(key).parse(); }

CycleIndexPoly automorphism_cycle_index(const Object& o, std::size_t truncation) {
  if (truncation < o.size()) {
    throw PreconditionError("truncation below the object size");
  }
  return aut_index(o, truncation);
}

std::vector<const Object*> carriers_at_level(const Object& o, int level) {
  std::vector<const Object*> out;
  collect_carriers(o, level, out);
  return out;
}

}  // namespace gibbs
