#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosheaf/cech.hpp"
#include "cosheaf/diagram.hpp"
#include "cosheaf/errors.hpp"
#include "cosheaf/fincat.hpp"
#include "cosheaf/kmod.hpp"
#include "cosheaf/protower.hpp"
#include "cosheaf/ring.hpp"
#include "cosheaf/spectral.hpp"

// JSON file formats. A matrix is a list of rows whose shape is implied by its context;
// entries are JSON integers or strings ("-12", "3/4", arbitrarily long digits).
namespace cosheaf::io {

using json = nlohmann::ordered_json;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

inline std::string string_of(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::size_t count_of(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::vector<std::string> strings_of(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string_of(j[i], path + "/" + std::to_string(i)));
  return out;
}

}  // namespace detail

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, column] = detail::line_column(text, e.byte);
    std::string msg = e.what();
    auto pos = msg.find("syntax error");
    throw ParseError(pos == std::string::npos ? msg : msg.substr(pos), line, column);
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

inline RingSpec ring_of(const json& doc, std::optional<RingSpec> fallback = {}) {
  if (doc.is_object() && doc.contains("ring")) return RingSpec::parse(detail::string_of(doc["ring"], "/ring"));
  if (fallback) return *fallback;
  return RingSpec{};
}

inline std::string kind_of(const json& doc) { return detail::string_of(detail::field(doc, "kind", ""), "/kind"); }

// Scalars and matrices.

template <class R>
json scalar_to_json(const R& ring, const typename R::Scalar& a) {
  std::string s = ring.format(a);
  if (s.find('/') == std::string::npos && s.size() < 18) return std::stoll(s);
  return s;
}

template <class R>
typename R::Scalar scalar_from_json(const R& ring, const json& j, const std::string& path) {
  try {
    if (j.is_number_integer()) return ring.parse(std::to_string(j.get<long long>()));
    if (j.is_string()) return ring.parse(j.get<std::string>());
  } catch (const Error& e) {
    detail::fail(path, e.what());
  } catch (const std::exception&) {
    detail::fail(path, "malformed number");
  }
  detail::fail(path, "expected an integer or a numeric string");
}

template <class R>
json matrix_to_json(const Matrix<R>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m.ring(), m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// rows == npos accepts any number of rows.
template <class R>
Matrix<R> matrix_from_json(const R& ring, const json& j, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!j.is_array()) detail::fail(path, "expected a matrix (list of rows)");
  if (rows != std::string::npos && j.size() != rows) {
    detail::fail(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  }
  Matrix<R> m(ring, j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != cols) {
      detail::fail(p, "expected a row of " + std::to_string(cols) + " entries");
    }
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = scalar_from_json(ring, j[i][k], p + "/" + std::to_string(k));
  }
  return m;
}

// Modules: {"generators": g, "relations": [[...]]} or the shorthand {"cyclic": [0, 2]} (0 is a free summand).

template <class R>
json module_to_json(const PresentedModule<R>& m) {
  json j;
  j["generators"] = m.generators();
  j["relations"] = matrix_to_json(m.relations());
  return j;
}

template <class R>
PresentedModule<R> module_from_json(const R& ring, const json& j, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected a module");
  if (j.contains("cyclic")) {
    const auto& c = j["cyclic"];
    if (!c.is_array()) detail::fail(path + "/cyclic", "expected a list of orders");
    std::vector<Integer> orders;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto p = path + "/cyclic/" + std::to_string(i);
      if (c[i].is_number_integer()) {
        orders.emplace_back(c[i].get<long long>());
      } else if (c[i].is_string()) {
        try {
          orders.push_back(Integer::parse(c[i].get<std::string>()));
        } catch (const std::exception&) {
          detail::fail(p, "malformed order");
        }
      } else {
        detail::fail(p, "expected an integer order");
      }
    }
    return PresentedModule<R>::cyclic_product(ring, orders);
  }
  const std::size_t g = detail::count_of(detail::field(j, "generators", path), path + "/generators");
  Matrix<R> rel(ring, 0, g);
  if (j.contains("relations")) rel = matrix_from_json(ring, j["relations"], std::string::npos, g, path + "/relations");
  return PresentedModule<R>(ring, g, std::move(rel));
}

// Categories: {"objects": [...], "morphisms": [{"name", "dom", "cod"}], "compose": [[g, f, g o f]]}.
// Identities are named id_<object> and compose implicitly. {"poset": {"elements": [...], "less": [[x, y]]}}
// builds the reflexive transitive closure.

inline json category_to_json(const FinCategory& c) {
  json j;
  j["objects"] = c.object_names();
  json ms = json::array();
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    if (c.is_identity(m)) continue;
    ms.push_back({{"name", c.morphism_name(m)}, {"dom", c.object_name(c.dom(m))}, {"cod", c.object_name(c.cod(m))}});
  }
  j["morphisms"] = std::move(ms);
  json comp = json::array();
  for (MorphismId g = 0; g < c.morphism_count(); ++g) {
    if (c.is_identity(g)) continue;
    for (MorphismId f : c.morphisms_into(c.dom(g))) {
      if (c.is_identity(f)) continue;
      comp.push_back({c.morphism_name(g), c.morphism_name(f), c.morphism_name(c.compose(g, f))});
    }
  }
  j["compose"] = std::move(comp);
  return j;
}

// Builder for a category description; check() reports the first axiom violation.
inline FinCategory::Builder category_builder(const json& j, const std::string& path) {
  FinCategory::Builder b;
  if (j.contains("poset")) {
    const auto& p = j["poset"];
    auto names = detail::strings_of(detail::field(p, "elements", path + "/poset"), path + "/poset/elements");
    const std::size_t k = names.size();
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) {
      if (!idx.emplace(names[i], i).second) detail::fail(path + "/poset/elements", "duplicate element " + names[i]);
    }
    std::vector<std::vector<bool>> leq(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) leq[i][i] = true;
    if (p.contains("less")) {
      const auto& l = p["less"];
      if (!l.is_array()) detail::fail(path + "/poset/less", "expected a list of pairs");
      for (std::size_t r = 0; r < l.size(); ++r) {
        auto pair = detail::strings_of(l[r], path + "/poset/less/" + std::to_string(r));
        if (pair.size() != 2 || !idx.count(pair[0]) || !idx.count(pair[1])) {
          detail::fail(path + "/poset/less/" + std::to_string(r), "expected a pair of known elements");
        }
        leq[idx[pair[0]]][idx[pair[1]]] = true;
      }
    }
    for (std::size_t m = 0; m < k; ++m) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
          if (leq[i][m] && leq[m][l]) leq[i][l] = true;
        }
      }
    }
    std::vector<std::vector<std::optional<MorphismId>>> arrow(k, std::vector<std::optional<MorphismId>>(k));
    for (const auto& n : names) b.add_object(n);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t l = 0; l < k; ++l) {
        if (i == l) {
          arrow[i][l] = b.identity(i);
        } else if (leq[i][l]) {
          if (leq[l][i]) detail::fail(path + "/poset", "relation is not antisymmetric at " + names[i] + ", " + names[l]);
          arrow[i][l] = b.add_morphism(names[i] + "->" + names[l], i, l);
        }
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t l = 0; l < k; ++l) {
          if (arrow[i][m] && arrow[m][l]) b.set_composite(*arrow[m][l], *arrow[i][m], *arrow[i][l]);
        }
      }
    }
    return b;
  }
  try {
    for (const auto& n : detail::strings_of(detail::field(j, "objects", path), path + "/objects")) b.add_object(n);
    if (j.contains("morphisms")) {
      const auto& ms = j["morphisms"];
      if (!ms.is_array()) detail::fail(path + "/morphisms", "expected a list");
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto p = path + "/morphisms/" + std::to_string(i);
        b.add_morphism(detail::string_of(detail::field(ms[i], "name", p), p + "/name"),
                       b.object(detail::string_of(detail::field(ms[i], "dom", p), p + "/dom")),
                       b.object(detail::string_of(detail::field(ms[i], "cod", p), p + "/cod")));
      }
    }
    if (j.contains("compose")) {
      const auto& cs = j["compose"];
      if (!cs.is_array()) detail::fail(path + "/compose", "expected a list of triples");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto p = path + "/compose/" + std::to_string(i);
        auto t = detail::strings_of(cs[i], p);
        if (t.size() != 3) detail::fail(p, "expected [g, f, g o f]");
        b.set_composite(b.morphism(t[0]), b.morphism(t[1]), b.morphism(t[2]));
      }
    }
  } catch (const CategoryError& e) {
    detail::fail(path, e.what());
  }
  return b;
}

inline CategoryPtr category_from_json(const json& j, const std::string& path) {
  return std::make_shared<const FinCategory>(category_builder(j, path).build());
}

// Finite spaces: {"points": [...], "opens": [[...]]}.

inline json space_to_json(const FinSpace& x) {
  json opens = json::array();
  for (auto o : x.opens()) opens.push_back(x.point_list(o));
  return {{"points", x.points()}, {"opens", std::move(opens)}};
}

inline FinSpace space_from_json(const json& j, const std::string& path) {
  auto points = detail::strings_of(detail::field(j, "points", path), path + "/points");
  const auto& o = detail::field(j, "opens", path);
  if (!o.is_array()) detail::fail(path + "/opens", "expected a list of point lists");
  std::vector<std::vector<std::string>> opens;
  for (std::size_t i = 0; i < o.size(); ++i) opens.push_back(detail::strings_of(o[i], path + "/opens/" + std::to_string(i)));
  try {
    return FinSpace(std::move(points), opens);
  } catch (const Error& e) {
    detail::fail(path, e.what());
  }
}

// Sites: {"space": ...} gives the open site; otherwise {"category": ..., and one of
// "covers": {U: [[legs]]}, "sieves": {U: [[members]]}, "topology": "discrete" | "trivial"}.

inline json site_to_json(const Site& site) {
  if (site.space()) return {{"space", space_to_json(*site.space())}};
  const auto& c = site.category();
  json j{{"category", category_to_json(c)}};
  auto names = [&](const std::vector<MorphismId>& ms) {
    json l = json::array();
    for (auto m : ms) l.push_back(c.morphism_name(m));
    return l;
  };
  if (site.has_pretopology()) {
    json covers = json::object();
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      json l = json::array();
      for (const auto& cv : site.covers(u)) l.push_back(names(cv.legs));
      covers[c.object_name(u)] = std::move(l);
    }
    j["covers"] = std::move(covers);
  } else {
    json sieves = json::object();
    for (ObjectId u = 0; u < c.object_count(); ++u) {
      json l = json::array();
      for (const auto& s : site.covering_sieves(u)) l.push_back(names(s.members));
      sieves[c.object_name(u)] = std::move(l);
    }
    j["sieves"] = std::move(sieves);
  }
  return j;
}

inline Site site_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected a site");
  if (j.contains("space")) return open_site(space_from_json(j["space"], path + "/space"));
  auto c = category_from_json(detail::field(j, "category", path), path + "/category");
  auto members = [&](const json& list, const std::string& p) {
    std::vector<MorphismId> out;
    for (const auto& name : detail::strings_of(list, p)) {
      auto m = c->find_morphism(name);
      if (!m) detail::fail(p, "unknown morphism '" + name + "'");
      out.push_back(*m);
    }
    return out;
  };
  auto per_object = [&](const std::string& key) {
    std::vector<std::vector<std::vector<MorphismId>>> out(c->object_count());
    const auto& o = j[key];
    if (!o.is_object()) detail::fail(path + "/" + key, "expected an object keyed by object names");
    for (auto it = o.begin(); it != o.end(); ++it) {
      const auto p = path + "/" + key + "/" + it.key();
      auto u = c->find_object(it.key());
      if (!u) detail::fail(p, "unknown object '" + it.key() + "'");
      if (!it.value().is_array()) detail::fail(p, "expected a list of morphism lists");
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        auto ms = members(it.value()[i], p + "/" + std::to_string(i));
        for (auto m : ms) {
          if (c->cod(m) != *u) detail::fail(p + "/" + std::to_string(i), c->morphism_name(m) + " does not end at " + it.key());
        }
        out[*u].push_back(std::move(ms));
      }
    }
    return out;
  };
  if (j.contains("covers")) {
    auto lists = per_object("covers");
    std::vector<std::vector<Cover>> covers(c->object_count());
    for (ObjectId u = 0; u < c->object_count(); ++u) {
      for (auto& legs : lists[u]) covers[u].push_back(Cover{u, std::move(legs)});
    }
    return topology_from_pretopology(c, std::move(covers));
  }
  if (j.contains("sieves")) {
    auto lists = per_object("sieves");
    Topology top(c->object_count());
    for (ObjectId u = 0; u < c->object_count(); ++u) {
      for (auto& ms : lists[u]) {
        Sieve s = make_sieve(u, std::move(ms));
        if (auto v = sieve_violation(*c, s)) detail::fail(path + "/sieves/" + c->object_name(u), "not a sieve: " + *v);
        top[u].push_back(std::move(s));
      }
    }
    return Site(c, std::move(top));
  }
  const auto mode = j.contains("topology") ? detail::string_of(j["topology"], path + "/topology") : "trivial";
  if (mode == "discrete") return discrete_site(c);
  if (mode == "trivial") return trivial_site(c);
  detail::fail(path + "/topology", "expected \"discrete\" or \"trivial\"");
}

inline bool same_site(const Site& a, const Site& b) {
  if (!(a.category() == b.category()) || a.topology() != b.topology() || a.space() != b.space()) return false;
  if (a.has_pretopology() != b.has_pretopology()) return false;
  if (!a.has_pretopology()) return true;
  for (ObjectId u = 0; u < a.category().object_count(); ++u) {
    if (a.covers(u) != b.covers(u)) return false;
  }
  return true;
}

// Precosheaves: {"values": {U: module}, "maps": {f: matrix}} with identities filled in, or
// {"constant": module} (identity maps) or {"constant_cosheaf": module} (needs the site).

template <class R>
json precosheaf_to_json(const Precosheaf<R>& a) {
  const auto& c = a.category();
  json values = json::object(), maps = json::object();
  for (ObjectId o = 0; o < c.object_count(); ++o) values[c.object_name(o)] = module_to_json(a.value(o));
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    if (!c.is_identity(m)) maps[c.morphism_name(m)] = matrix_to_json(a.matrix(m));
  }
  return {{"values", std::move(values)}, {"maps", std::move(maps)}};
}

template <class R>
Precosheaf<R> precosheaf_from_json(const R& ring, const Site& site, const json& j, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected a precosheaf");
  const auto& cp = site.category_ptr();
  const auto& c = *cp;
  if (j.contains("constant")) return Precosheaf<R>::constant(cp, module_from_json(ring, j["constant"], path + "/constant"));
  if (j.contains("constant_cosheaf")) {
    return constant_cosheaf(site, module_from_json(ring, j["constant_cosheaf"], path + "/constant_cosheaf"));
  }
  const auto& vj = detail::field(j, "values", path);
  if (!vj.is_object()) detail::fail(path + "/values", "expected an object keyed by object names");
  std::vector<std::optional<PresentedModule<R>>> vals(c.object_count());
  for (auto it = vj.begin(); it != vj.end(); ++it) {
    auto o = c.find_object(it.key());
    if (!o) detail::fail(path + "/values/" + it.key(), "unknown object");
    vals[*o] = module_from_json(ring, it.value(), path + "/values/" + it.key());
  }
  std::vector<PresentedModule<R>> values;
  for (ObjectId o = 0; o < c.object_count(); ++o) {
    if (!vals[o]) detail::fail(path + "/values", "no value for object '" + c.object_name(o) + "'");
    values.push_back(*vals[o]);
  }
  std::vector<std::optional<Matrix<R>>> mats(c.morphism_count());
  if (j.contains("maps")) {
    const auto& mj = j["maps"];
    if (!mj.is_object()) detail::fail(path + "/maps", "expected an object keyed by morphism names");
    for (auto it = mj.begin(); it != mj.end(); ++it) {
      auto m = c.find_morphism(it.key());
      if (!m) detail::fail(path + "/maps/" + it.key(), "unknown morphism");
      mats[*m] = matrix_from_json(ring, it.value(), values[c.dom(*m)].generators(), values[c.cod(*m)].generators(),
                                  path + "/maps/" + it.key());
    }
  }
  std::vector<Matrix<R>> matrices;
  for (MorphismId m = 0; m < c.morphism_count(); ++m) {
    if (mats[m]) {
      matrices.push_back(*mats[m]);
    } else if (c.is_identity(m)) {
      matrices.push_back(Matrix<R>::identity(ring, values[c.dom(m)].generators()));
    } else {
      detail::fail(path + "/maps", "no matrix for morphism '" + c.morphism_name(m) + "'");
    }
  }
  return Precosheaf<R>(cp, ring, std::move(values), std::move(matrices));
}

template <class R>
bool same_precosheaf(const Precosheaf<R>& a, const Precosheaf<R>& b) {
  return a.category() == b.category() && a.values() == b.values() && a.matrices() == b.matrices();
}

// Towers: {"rule": "stabilized", "levels": [module], "steps": [matrix]} with steps[k] : A_{k+2} -> A_{k+1},
// or {"rule": "builtin:convergentB", "G": module}.

template <class R>
json tower_to_json(const Tower<R>& t) {
  if (t.offset() != 0) throw InvariantError("shifted towers have no file form");
  json j{{"rule", to_string(t.rule())}};
  if (t.rule() == TowerRule::kConvergentB) {
    j["G"] = module_to_json(*t.builtin_parameter());
    return j;
  }
  json levels = json::array(), steps = json::array();
  for (const auto& l : t.prefix_levels()) levels.push_back(module_to_json(l));
  for (const auto& s : t.prefix_steps()) steps.push_back(matrix_to_json(s));
  j["levels"] = std::move(levels);
  j["steps"] = std::move(steps);
  return j;
}

template <class R>
Tower<R> tower_from_json(const R& ring, const json& j, const std::string& path) {
  const auto rule = detail::string_of(detail::field(j, "rule", path), path + "/rule");
  if (rule == "builtin:convergentB") return Tower<R>::convergent(module_from_json(ring, detail::field(j, "G", path), path + "/G"));
  if (rule != "stabilized") detail::fail(path + "/rule", "expected \"stabilized\" or \"builtin:convergentB\"");
  const auto& lj = detail::field(j, "levels", path);
  if (!lj.is_array() || lj.empty()) detail::fail(path + "/levels", "expected a nonempty list of modules");
  std::vector<PresentedModule<R>> levels;
  for (std::size_t i = 0; i < lj.size(); ++i) levels.push_back(module_from_json(ring, lj[i], path + "/levels/" + std::to_string(i)));
  std::vector<Matrix<R>> steps;
  if (j.contains("steps")) {
    const auto& sj = j["steps"];
    if (!sj.is_array() || sj.size() + 1 != levels.size()) {
      detail::fail(path + "/steps", "expected " + std::to_string(levels.size() - 1) + " step matrices");
    }
    for (std::size_t k = 0; k < sj.size(); ++k) {
      steps.push_back(matrix_from_json(ring, sj[k], levels[k + 1].generators(), levels[k].generators(),
                                       path + "/steps/" + std::to_string(k)));
    }
  } else if (levels.size() > 1) {
    detail::fail(path, "missing field 'steps'");
  }
  return Tower<R>::explicit_prefix(std::move(levels), std::move(steps));
}

template <class R>
bool same_tower(const Tower<R>& a, const Tower<R>& b) {
  return a.rule() == b.rule() && a.offset() == b.offset() && a.builtin_parameter() == b.builtin_parameter() &&
         a.prefix_levels() == b.prefix_levels() && a.prefix_steps() == b.prefix_steps();
}

// Bicomplexes: {"entries": [[module for t = 0..T] for s = 0..S],
//               "horizontal": [{"at": [s, t], "matrix": ...}], "vertical": [...]}; omitted maps are zero.

template <class R>
json bicomplex_to_json(const Bicomplex<R>& x) {
  json entries = json::array(), hor = json::array(), ver = json::array();
  for (std::size_t s = 0; s <= x.s_max(); ++s) {
    json col = json::array();
    for (std::size_t t = 0; t <= x.t_max(); ++t) {
      col.push_back(module_to_json(x.entry(s, t)));
      if (s > 0 && !x.horizontal(s, t).matrix().is_zero()) {
        hor.push_back({{"at", {s, t}}, {"matrix", matrix_to_json(x.horizontal(s, t).matrix())}});
      }
      if (t > 0 && !x.vertical(s, t).matrix().is_zero()) {
        ver.push_back({{"at", {s, t}}, {"matrix", matrix_to_json(x.vertical(s, t).matrix())}});
      }
    }
    entries.push_back(std::move(col));
  }
  return {{"entries", std::move(entries)}, {"horizontal", std::move(hor)}, {"vertical", std::move(ver)}};
}

template <class R>
Bicomplex<R> bicomplex_from_json(const R& ring, const json& j, const std::string& path) {
  const auto& ej = detail::field(j, "entries", path);
  if (!ej.is_array() || ej.empty()) detail::fail(path + "/entries", "expected a nonempty grid of modules");
  std::vector<std::vector<PresentedModule<R>>> grid;
  for (std::size_t s = 0; s < ej.size(); ++s) {
    const auto p = path + "/entries/" + std::to_string(s);
    if (!ej[s].is_array() || ej[s].size() != ej[0].size() || ej[s].empty()) {
      detail::fail(p, "expected a column of " + std::to_string(ej[0].size()) + " modules");
    }
    std::vector<PresentedModule<R>> col;
    for (std::size_t t = 0; t < ej[s].size(); ++t) col.push_back(module_from_json(ring, ej[s][t], p + "/" + std::to_string(t)));
    grid.push_back(std::move(col));
  }
  Bicomplex<R> x(ring, std::move(grid));
  for (const char* key : {"horizontal", "vertical"}) {
    if (!j.contains(key)) continue;
    const bool horizontal = std::string(key) == "horizontal";
    const auto& list = j[key];
    if (!list.is_array()) detail::fail(path + "/" + key, "expected a list of maps");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto p = path + "/" + key + "/" + std::to_string(i);
      const auto& at = detail::field(list[i], "at", p);
      if (!at.is_array() || at.size() != 2) detail::fail(p + "/at", "expected [s, t]");
      const auto s = detail::count_of(at[0], p + "/at/0"), t = detail::count_of(at[1], p + "/at/1");
      if (s > x.s_max() || t > x.t_max() || (horizontal ? s == 0 : t == 0)) detail::fail(p + "/at", "position outside the grid");
      const auto& target = horizontal ? x.entry(s - 1, t) : x.entry(s, t - 1);
      auto m = matrix_from_json(ring, detail::field(list[i], "matrix", p), x.entry(s, t).generators(), target.generators(),
                                p + "/matrix");
      if (horizontal) {
        x.set_horizontal(s, t, std::move(m));
      } else {
        x.set_vertical(s, t, std::move(m));
      }
    }
  }
  return x;
}

template <class R>
bool same_bicomplex(const Bicomplex<R>& a, const Bicomplex<R>& b) {
  if (a.s_max() != b.s_max() || a.t_max() != b.t_max()) return false;
  for (std::size_t s = 0; s <= a.s_max(); ++s) {
    for (std::size_t t = 0; t <= a.t_max(); ++t) {
      if (!(a.entry(s, t) == b.entry(s, t))) return false;
      if (s > 0 && !(a.horizontal(s, t).matrix() == b.horizontal(s, t).matrix())) return false;
      if (t > 0 && !(a.vertical(s, t).matrix() == b.vertical(s, t).matrix())) return false;
    }
  }
  return true;
}

// Whole documents: {"kind": "site" | "precosheaf" | "tower" | "bicomplex", "ring": tag, ...}.
// A precosheaf document carries "site" and may name a base object "at" and a cover "cover" of it,
// listing leg morphisms or, in thin categories, their domains.

template <class R>
struct PrecosheafDocument {
  Site site;
  Precosheaf<R> cosheaf;
  ObjectId at = 0;
  std::optional<Cover> cover;
};

inline ObjectId default_base(const Site& site) {
  const auto& c = site.category();
  if (site.space()) return c.object(site.space()->name_of(site.space()->whole()));
  return c.object_count() - 1;
}

inline Cover cover_from_json(const Site& site, ObjectId at, const json& j, const std::string& path) {
  const auto& c = site.category();
  Cover cv{at, {}};
  auto names = detail::strings_of(j, path);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto p = path + "/" + std::to_string(i);
    if (auto m = c.find_morphism(names[i])) {
      if (c.cod(*m) != at) detail::fail(p, names[i] + " does not end at " + c.object_name(at));
      cv.legs.push_back(*m);
    } else if (auto o = c.find_object(names[i])) {
      const auto& h = c.hom(*o, at);
      if (h.size() != 1) detail::fail(p, "no unique arrow from " + names[i] + " to " + c.object_name(at));
      cv.legs.push_back(h.front());
    } else {
      detail::fail(p, "unknown leg '" + names[i] + "'");
    }
  }
  return cv;
}

inline json cover_to_json(const Site& site, const Cover& cv) {
  const auto& c = site.category();
  json l = json::array();
  for (auto m : cv.legs) l.push_back(c.is_thin() ? c.object_name(c.dom(m)) : c.morphism_name(m));
  return l;
}

template <class R>
PrecosheafDocument<R> precosheaf_document(const R& ring, const json& doc) {
  Site site = site_from_json(detail::field(doc, "site", ""), "/site");
  auto a = precosheaf_from_json(ring, site, doc, "");
  ObjectId at = default_base(site);
  if (doc.contains("at")) {
    auto name = detail::string_of(doc["at"], "/at");
    auto o = site.category().find_object(name);
    if (!o) detail::fail("/at", "unknown object '" + name + "'");
    at = *o;
  }
  std::optional<Cover> cover;
  if (doc.contains("cover")) cover = cover_from_json(site, at, doc["cover"], "/cover");
  return {std::move(site), std::move(a), at, std::move(cover)};
}

template <class R>
json precosheaf_document_to_json(const PrecosheafDocument<R>& d) {
  json j{{"kind", "precosheaf"}, {"ring", d.cosheaf.ring().spec().to_string()}, {"site", site_to_json(d.site)}};
  const json body = precosheaf_to_json(d.cosheaf);
  for (const auto& [k, v] : body.items()) j[k] = v;
  j["at"] = d.site.category().object_name(d.at);
  if (d.cover) j["cover"] = cover_to_json(d.site, *d.cover);
  return j;
}

template <class R>
bool same_document(const PrecosheafDocument<R>& a, const PrecosheafDocument<R>& b) {
  return same_site(a.site, b.site) && same_precosheaf(a.cosheaf, b.cosheaf) && a.at == b.at && a.cover == b.cover;
}

// Report helpers.

inline json canonical_to_json(const CanonicalForm& cf) {
  json torsion = json::array();
  for (const auto& d : cf.torsion) torsion.push_back(d.fits_int64() ? json(d.to_int64()) : json(d.to_string()));
  return {{"free_rank", cf.free_rank}, {"torsion", std::move(torsion)}, {"text", cf.to_string()}};
}

}  // namespace cosheaf::io
