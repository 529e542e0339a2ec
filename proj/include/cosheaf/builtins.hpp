#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cosheaf/io.hpp"

namespace cosheaf {

struct BuiltinExample {
  std::string name;
  std::string summary;
  io::json document;
};

namespace detail {

inline io::json pseudocircle_space_json() {
  return {{"points", {"a", "b", "c", "d"}},
          {"opens", io::json::parse(R"([[], ["a"], ["c"], ["a", "c"], ["a", "b", "c"], ["a", "c", "d"], ["a", "b", "c", "d"]])")}};
}

}  // namespace detail

inline std::vector<BuiltinExample> builtin_examples() {
  std::vector<BuiltinExample> out;
  out.push_back({"pseudocircle",
                 "four-point circle with the constant cosheaf Z_# and the cover {a},{c},{a,b,c},{a,c,d}",
                 {{"kind", "precosheaf"},
                  {"ring", "Z"},
                  {"site", {{"space", detail::pseudocircle_space_json()}}},
                  {"constant_cosheaf", {{"cyclic", {0}}}},
                  {"at", "{a,b,c,d}"},
                  {"cover", {"{a}", "{c}", "{a,b,c}", "{a,c,d}"}}}});
  out.push_back({"convergentB",
                 "tower B_n = Z^{n+1} with steps (g_0, ..., g_{n+1}) -> (g_0 + g_{n+1}, g_1, ..., g_n)",
                 {{"kind", "tower"}, {"ring", "Z"}, {"rule", "builtin:convergentB"}, {"G", {{"cyclic", {0}}}}}});
  out.push_back({"point",
                 "one-point space with the constant precosheaf Z",
                 {{"kind", "precosheaf"},
                  {"ring", "Z"},
                  {"site", {{"space", {{"points", {"p"}}, {"opens", io::json::parse(R"([[], ["p"]])")}}}}},
                  {"constant", {{"cyclic", {0}}}},
                  {"at", "{p}"}}});
  out.push_back({"two-points",
                 "discrete two-point space with the constant cosheaf Z_# and the cover by its points",
                 {{"kind", "precosheaf"},
                  {"ring", "Z"},
                  {"site",
                   {{"space", {{"points", {"p", "q"}}, {"opens", io::json::parse(R"([[], ["p"], ["q"], ["p", "q"]])")}}}}},
                  {"constant_cosheaf", {{"cyclic", {0}}}},
                  {"at", "{p,q}"},
                  {"cover", {"{p}", "{q}"}}}});
  out.push_back({"pseudocircle-site", "the open site of the four-point circle",
                 {{"kind", "site"}, {"space", detail::pseudocircle_space_json()}}});
  out.push_back({"staircase",
                 "bicomplex over Z whose vertical spectral sequence has a nonzero d^2 with cokernel Z/3",
                 {{"kind", "bicomplex"},
                  {"ring", "Z"},
                  {"entries", io::json::parse(R"([[{"generators": 0}, {"generators": 1}],
                                                   [{"generators": 1}, {"generators": 1}],
                                                   [{"generators": 1}, {"generators": 0}]])")},
                  {"horizontal", io::json::parse(R"([{"at": [2, 0], "matrix": [[1]]}, {"at": [1, 1], "matrix": [[3]]}])")},
                  {"vertical", io::json::parse(R"([{"at": [1, 1], "matrix": [[1]]}])")}}});
  return out;
}

inline std::optional<BuiltinExample> find_example(const std::string& name) {
  for (auto& e : builtin_examples()) {
    if (e.name == name) return e;
  }
  return std::nullopt;
}

inline std::vector<std::string> list_examples() {
  std::vector<std::string> names;
  for (const auto& e : builtin_examples()) names.push_back(e.name);
  return names;
}

}  // namespace cosheaf
