#include <algorithm>
#include <chrono>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/crc.hpp>

#include "cosheaf/builtins.hpp"
#include "cosheaf/cech.hpp"
#include "cosheaf/io.hpp"
#include "cosheaf/protower.hpp"
#include "cosheaf/satellite.hpp"
#include "cosheaf/spectral.hpp"

namespace {

using namespace cosheaf;
using io::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kParse = 2, kInvariant = 3, kUndecided = 4 };

struct Options {
  std::string ring;
  bool json_output = false;
  bool timing = false;
};

struct Report {
  json data = json::object();
  std::vector<std::string> lines;
  int status = kOk;

  void line(std::string s) { lines.push_back(std::move(s)); }
};

struct Input {
  json doc;
  std::string digest;
};

std::string crc32_hex(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

Input load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return {io::parse_text(text), "crc32:" + crc32_hex(text)};
}

Input load_json(const json& doc) {
  const std::string text = doc.dump();
  return {doc, "crc32:" + crc32_hex(text)};
}

RingSpec pick_ring(const Options& opt, const json& doc) {
  if (!opt.ring.empty()) return RingSpec::parse(opt.ring);
  return io::ring_of(doc);
}

template <class R>
std::string form(const PresentedModule<R>& m) {
  return canonicalize(m).to_string();
}

template <class R>
json form_json(const PresentedModule<R>& m) {
  return io::canonical_to_json(canonicalize(m));
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// "Z", "Z^2 + Z/6", "0"; any single letter names the ring itself. A leading '{' reads a JSON module.
template <class R>
PresentedModule<R> module_from_text(const R& ring, const std::string& text) {
  if (!text.empty() && text.front() == '{') return io::module_from_json(ring, io::parse_text(text), "");
  std::vector<Integer> orders;
  std::string compact;
  for (char ch : text) {
    if (ch != ' ') compact += ch;
  }
  if (compact == "0") return PresentedModule<R>::zero(ring);
  std::stringstream ss(compact);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part.empty() || !std::isalpha(static_cast<unsigned char>(part[0]))) {
      throw ParseError("cannot read module '" + text + "' (try Z, Z^2, Z/6 or Z + Z/2)");
    }
    const std::string rest = part.substr(1);
    try {
      if (rest.empty()) {
        orders.emplace_back(0);
      } else if (rest[0] == '^') {
        const auto k = std::stoul(rest.substr(1));
        for (unsigned long i = 0; i < k; ++i) orders.emplace_back(0);
      } else if (rest[0] == '/') {
        orders.push_back(Integer::parse(rest.substr(1)));
      } else {
        throw ParseError("");
      }
    } catch (const std::exception&) {
      throw ParseError("cannot read module '" + text + "' (try Z, Z^2, Z/6 or Z + Z/2)");
    }
  }
  return PresentedModule<R>::cyclic_product(ring, orders);
}

template <class R>
std::string vector_text(const R& ring, const std::vector<typename R::Scalar>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(ring.format(x));
  return "(" + join(parts, ", ") + ")";
}

template <class R>
json vector_json(const R& ring, const std::vector<typename R::Scalar>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(io::scalar_to_json(ring, x));
  return out;
}

// site check

Report site_check(const json& doc) {
  const bool nested = doc.contains("site");
  Site site = nested ? io::site_from_json(doc["site"], "/site") : io::site_from_json(doc, "");
  const auto& c = site.category();
  Report rep;
  rep.data["command"] = "site check";
  rep.data["objects"] = c.object_count();
  rep.data["morphisms"] = c.morphism_count();
  rep.data["poset"] = c.is_poset();
  rep.data["axioms"] = "GT1-GT4 hold";
  rep.data["pretopology"] = site.has_pretopology();
  rep.data["pretopology_generates_topology"] = site.pretopology_generated();
  rep.line("site: " + std::to_string(c.object_count()) + " objects, " + std::to_string(c.morphism_count()) +
           " morphisms" + (c.is_poset() ? " (poset)" : ""));
  rep.line("axioms: GT1-GT4 hold");
  rep.line(std::string("pretopology: ") + (site.has_pretopology() ? "yes" : "no") +
           (site.has_pretopology() ? std::string(", generates the topology: ") + (site.pretopology_generated() ? "yes" : "no")
                                   : std::string()));
  json per = json::object();
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    std::vector<std::string> members;
    for (auto m : site.minimal_covering_sieve(u).members) members.push_back(c.morphism_name(m));
    per[c.object_name(u)] = {{"covering_sieves", site.covering_sieves(u).size()}, {"minimal_covering_sieve", members}};
    rep.line("  " + c.object_name(u) + ": " + std::to_string(site.covering_sieves(u).size()) +
             " covering sieves, minimal {" + join(members, ", ") + "}");
  }
  rep.data["per_object"] = std::move(per);
  return rep;
}

// homology cech|roos

template <class R>
Report homology(const io::PrecosheafDocument<R>& d, const std::string& route, std::size_t max_degree) {
  Report rep;
  const auto& c = d.site.category();
  rep.data["command"] = "homology " + route;
  rep.data["at"] = c.object_name(d.at);
  std::string method;
  json degrees = json::array();
  std::vector<std::string> forms;
  for (std::size_t n = 0; n <= max_degree; ++n) {
    PresentedModule<R> h = PresentedModule<R>::zero(d.cosheaf.ring());
    if (route == "cech") {
      if (d.cover) {
        h = h_n_cover(d.site, *d.cover, d.cosheaf, n);
        method = "given cover";
      } else {
        auto res = cech_homology(d.site, d.cosheaf, d.at, n, CechRoute::kCovers);
        h = res.module;
        method = res.method;
      }
    } else {
      if (d.cover) {
        h = h_n_sieve(sieve_generated_by(c, *d.cover), d.cosheaf, n);
        method = "sieve generated by the given cover";
      } else {
        auto res = cech_homology(d.site, d.cosheaf, d.at, n, CechRoute::kSieves);
        h = res.module;
        method = res.method;
      }
    }
    degrees.push_back(form_json(h));
    forms.push_back(form(h));
  }
  rep.data["method"] = method;
  rep.data["homology"] = std::move(degrees);
  rep.line((route == "cech" ? "Cech" : "Roos") + std::string(" homology at ") + c.object_name(d.at) + " (" + method +
           ")");
  for (std::size_t n = 0; n < forms.size(); ++n) rep.line("  H_" + std::to_string(n) + " = " + forms[n]);
  return rep;
}

// cosheafify

std::string witness_text(const FinCategory& c, const SieveWitness& w) {
  return "at " + c.object_name(w.object) + " along " + describe_sieve(c, w.sieve) + ": " + w.detail;
}

template <class R>
Report cosheafify(const io::PrecosheafDocument<R>& d) {
  Report rep;
  const auto& c = d.site.category();
  rep.data["command"] = "cosheafify";
  auto in_bad = cosheaf_violation(d.site, d.cosheaf);
  rep.data["input_is_cosheaf"] = !in_bad;
  rep.line(std::string("input is a cosheaf: ") + (in_bad ? "no" : "yes"));
  if (in_bad) {
    rep.data["input_witness"] = witness_text(c, *in_bad);
    rep.line("  witness " + witness_text(c, *in_bad));
  }
  auto p = plus(d.site, d.cosheaf);
  auto s = sharp(d.site, d.cosheaf);
  auto ss = sharp(d.site, s.result);
  auto out_bad = cosheaf_violation(d.site, s.result);
  bool idempotent = true;
  json values = json::object();
  rep.line("values (input | plus | sharp):");
  for (ObjectId u = 0; u < c.object_count(); ++u) {
    values[c.object_name(u)] = {{"input", form_json(d.cosheaf.value(u))},
                                {"plus", form_json(p.result.value(u))},
                                {"sharp", form_json(s.result.value(u))}};
    rep.line("  " + c.object_name(u) + ": " + form(d.cosheaf.value(u)) + " | " + form(p.result.value(u)) + " | " +
             form(s.result.value(u)));
    if (!is_isomorphism(ss.lambda.component(u))) idempotent = false;
  }
  rep.data["values"] = std::move(values);
  rep.data["sharp_is_cosheaf"] = !out_bad;
  rep.data["sharp_idempotent"] = idempotent;
  rep.line(std::string("sharp is a cosheaf: ") + (out_bad ? "no" : "yes"));
  rep.line(std::string("sharp of sharp maps isomorphically: ") + (idempotent ? "yes" : "no"));
  if (out_bad || !idempotent) rep.status = kInvariant;
  return rep;
}

// satellite

template <class R>
Report satellite(const io::PrecosheafDocument<R>& d, const std::string& functor, const std::string& sieve_choice,
                 std::size_t depth, std::size_t max_degree) {
  if (depth < max_degree + 1) throw DimensionError("--depth must be at least --max-degree + 1");
  Report rep;
  const auto& c = d.site.category();
  rep.data["command"] = "satellite";
  std::optional<Sieve> r;
  AdditiveFunctor<R> f;
  if (functor == "eval") {
    f = evaluation_functor<R>(d.at, "evaluation at " + c.object_name(d.at));
  } else {
    if (sieve_choice == "maximal") {
      r = maximal_sieve(c, d.at);
    } else if (sieve_choice == "cover") {
      if (!d.cover) throw ParseError("--sieve cover needs a cover in the input");
      r = sieve_generated_by(c, *d.cover);
    } else {
      r = d.site.minimal_covering_sieve(d.at);
    }
    f = sieve_h0_functor<R>(*r, "H_0(" + describe_sieve(c, *r) + ", -)");
  }
  rep.data["functor"] = f.name;
  rep.data["depth"] = depth;
  auto res = resolve(d.cosheaf, depth);
  json degrees = json::array();
  rep.line("left satellites of " + f.name + ", resolution depth " + std::to_string(depth));
  bool agree = true;
  for (std::size_t n = 0; n <= max_degree; ++n) {
    auto l = left_satellite(f, res, n);
    json entry{{"degree", n}, {"value", form_json(l)}};
    std::string text = "  L_" + std::to_string(n) + " = " + form(l);
    if (r) {
      auto h = h_n_sieve(*r, d.cosheaf, n);
      const bool same = is_isomorphic(l, h);
      agree = agree && same;
      entry["sieve_homology"] = form_json(h);
      text += "   (sieve homology " + form(h) + (same ? ", agrees)" : ", DIFFERS)");
    }
    degrees.push_back(std::move(entry));
    rep.line(text);
  }
  rep.data["satellites"] = std::move(degrees);
  if (r) rep.data["agrees_with_sieve_homology"] = agree;
  if (!agree) rep.status = kInvariant;
  return rep;
}

// spectral

template <class R>
json page_json(const Bicomplex<R>& x, const SpectralPage<R>& pg) {
  json entries = json::array(), diffs = json::array();
  for (std::size_t s = 0; s <= x.s_max(); ++s) {
    json col = json::array();
    for (std::size_t t = 0; t <= x.t_max(); ++t) {
      col.push_back(form_json(pg.entry(s, t)));
      const auto& d = pg.differential(s, t);
      if (is_zero_map(d)) continue;
      auto [s2, t2] = differential_target(pg.orientation, pg.r, static_cast<long>(s), static_cast<long>(t));
      diffs.push_back({{"from", {s, t}}, {"to", {s2, t2}}, {"matrix", io::matrix_to_json(d.matrix())}});
    }
    entries.push_back(std::move(col));
  }
  return {{"r", pg.r}, {"entries", std::move(entries)}, {"differentials", std::move(diffs)}};
}

template <class R>
void page_lines(Report& rep, const Bicomplex<R>& x, const SpectralPage<R>& pg, const std::string& title,
                bool count_differentials) {
  rep.line("  " + title + " (columns s = 0.." + std::to_string(x.s_max()) + ")");
  for (std::size_t t = x.t_max() + 1; t-- > 0;) {
    std::vector<std::string> row;
    for (std::size_t s = 0; s <= x.s_max(); ++s) row.push_back(form(pg.entry(s, t)));
    rep.line("    t=" + std::to_string(t) + " | " + join(row, "  "));
  }
  std::size_t nonzero = 0;
  for (std::size_t s = 0; s <= x.s_max(); ++s) {
    for (std::size_t t = 0; t <= x.t_max(); ++t) {
      if (!is_zero_map(pg.differential(s, t))) ++nonzero;
    }
  }
  if (!count_differentials) return;
  rep.line("    nonzero differentials: " + std::to_string(nonzero));
}

template <class R>
Report spectral(const Bicomplex<R>& x, const std::string& orientation, std::size_t r_max,
                std::optional<std::size_t> valid_below = std::nullopt) {
  if (r_max < 2) throw DimensionError("--pages must be at least 2");
  x.validate();
  Report rep;
  rep.data["command"] = "spectral";
  rep.data["grid"] = {x.s_max() + 1, x.t_max() + 1};
  auto tot = total_complex(x);
  json hom = json::array();
  std::vector<std::string> hforms;
  for (std::size_t n = 0; n <= x.s_max() + x.t_max(); ++n) {
    auto h = tot.homology(n);
    hom.push_back(form_json(h));
    hforms.push_back(form(h));
  }
  rep.data["total_homology"] = std::move(hom);
  rep.line("bicomplex " + std::to_string(x.s_max() + 1) + " x " + std::to_string(x.t_max() + 1) + ", H(Tot) = [" +
           join(hforms, ", ") + "]");
  if (valid_below) {
    rep.data["valid_below_degree"] = *valid_below;
    rep.line("truncated Cech-of-resolution bicomplex: total degrees below " + std::to_string(*valid_below) +
             " are exact, higher ones see the truncation");
  }
  std::vector<Orientation> os;
  if (orientation != "horizontal") os.push_back(Orientation::kVertical);
  if (orientation != "vertical") os.push_back(Orientation::kHorizontal);
  json seqs = json::array();
  bool all_ok = true;
  for (auto o : os) {
    rep.line(to_string(o) + " spectral sequence (filtration by " + (o == Orientation::kVertical ? "s" : "t") + ")");
    auto pgs = pages(x, o, r_max);
    json pj = json::array();
    for (std::size_t r = 1; r <= r_max; ++r) {
      pj.push_back(page_json(x, pgs[r]));
      page_lines(rep, x, pgs[r], "E^" + std::to_string(r), true);
    }
    auto inf = e_infinity(x, o);
    auto conv = verify_convergence(x, o);
    all_ok = all_ok && conv.ok;
    json ij = page_json(x, inf);
    ij["stable_from"] = inf.stable_from;
    page_lines(rep, x, inf, "E^inf (page " + std::to_string(inf.r) + ")", false);
    rep.line(std::string("    converges to H(Tot): ") + (conv.ok ? "yes" : "no, " + conv.detail));
    seqs.push_back({{"orientation", to_string(o)}, {"pages", std::move(pj)}, {"e_infinity", std::move(ij)},
                    {"convergence_ok", conv.ok}, {"convergence_detail", conv.detail}});
  }
  rep.data["sequences"] = std::move(seqs);
  if (!all_ok) rep.status = kInvariant;
  return rep;
}

template <class R>
Bicomplex<R> bicomplex_of(const R& ring, const json& doc, std::size_t depth, std::size_t s_max) {
  if (io::kind_of(doc) == "bicomplex") return io::bicomplex_from_json(ring, doc, "");
  auto d = io::precosheaf_document(ring, doc);
  if (!d.cover) throw ParseError("the Cech-of-resolution bicomplex needs a cover in the input");
  return cech_resolution_bicomplex(d.site, *d.cover, resolve(d.cosheaf, depth), s_max);
}

// pro check

template <class R>
Report pro_check(const Tower<R>& t, std::size_t bound, const PresentedModule<R>& m) {
  Report rep;
  const auto& ring = t.ring();
  rep.data["command"] = "pro check";
  rep.data["tower"] = t.description();
  rep.data["bound"] = bound;
  rep.line("tower: " + t.description() + ", bound " + std::to_string(bound));
  bool undecided = false;
  if (bound >= 2) {
    auto rc = rudimentary_obstruction(t, bound);
    const bool obstructed = rc.verdict == RudimentaryVerdict::kObstructed;
    undecided = undecided || !obstructed;
    json ws = json::array();
    for (const auto& w : rc.witnesses) {
      ws.push_back({{"i0", w.i0}, {"j", w.j}, {"element", vector_json(ring, w.element)},
                    {"preimage", vector_json(ring, w.preimage)}});
    }
    rep.data["rudimentary"] = {{"verdict", obstructed ? "Obstructed" : "Inconclusive"},
                               {"reason", rc.reason},
                               {"witnesses", std::move(ws)}};
    rep.line(std::string("rudimentary: ") + (obstructed ? "Obstructed" : "Inconclusive") +
             (rc.reason.empty() ? "" : " (" + rc.reason + ")"));
    for (std::size_t k = 0; k < rc.witnesses.size() && k < 3; ++k) {
      const auto& w = rc.witnesses[k];
      rep.line("  witness i0=" + std::to_string(w.i0) + " j=" + std::to_string(w.j) + " a=" + vector_text(ring, w.element));
    }
    if (rc.witnesses.size() > 3) rep.line("  ... " + std::to_string(rc.witnesses.size() - 3) + " more witnesses");
  } else {
    rep.data["rudimentary"] = {{"verdict", "Inconclusive"}, {"reason", "bound below 2"}};
    rep.line("rudimentary: Inconclusive (bound below 2)");
    undecided = true;
  }
  auto zc = is_zero_up_to(t, bound);
  const bool zero = zc.verdict == ZeroVerdict::kZero;
  undecided = undecided || !zero;
  json zw = json::array();
  for (auto [i, j] : zc.witnesses) zw.push_back({i, j});
  rep.data["zero"] = {{"verdict", zero ? "Zero" : "Unknown"}, {"reason", zc.reason}, {"witnesses", std::move(zw)}};
  rep.line(std::string("zero: ") + (zero ? "Zero" : "Unknown") + (zc.reason.empty() ? "" : " (" + zc.reason + ")"));
  auto pc = pairing_colimit(t, m, bound);
  json terms = json::array();
  for (const auto& term : pc.terms) terms.push_back(form_json(term));
  rep.data["pairing"] = {{"coefficients", form_json(m)},
                         {"terms", std::move(terms)},
                         {"colimit", form_json(pc.colimit)},
                         {"stabilized", pc.stabilized},
                         {"stable_from", pc.stable_from ? json(*pc.stable_from) : json(nullptr)}};
  rep.line("pairing with " + form(m) + ": truncated colimit " + form(pc.colimit) +
           (pc.stabilized ? ", stabilized from level " + std::to_string(*pc.stable_from) : ", not stabilized"));
  if (undecided) rep.status = kUndecided;
  return rep;
}

template <class R>
Tower<R> tower_of(const R& ring, const std::optional<json>& doc, const std::string& builtin, const std::string& g) {
  if (doc) return io::tower_from_json(ring, *doc, "");
  if (builtin != "convergentB") throw ParseError("unknown builtin tower '" + builtin + "' (expected convergentB)");
  return builtin_convergent_tower(module_from_text(ring, g.empty() ? "Z" : g));
}

// validate

Report validate(const json& doc, const Options& opt) {
  Report rep;
  rep.data["command"] = "validate";
  const auto kind = io::kind_of(doc);
  rep.data["kind"] = kind;
  json diags = json::array();
  auto diag = [&](const std::string& what, const std::string& detail) {
    diags.push_back({{"check", what}, {"detail", detail}});
    rep.line("  " + what + ": " + detail);
  };
  rep.line("validating a " + kind + " document");
  try {
    if (kind == "site") {
      io::site_from_json(doc, "");
    } else if (kind == "precosheaf") {
      with_ring(pick_ring(opt, doc), [&](auto ring) {
        auto d = io::precosheaf_document(ring, doc);
        if (auto v = d.cosheaf.functoriality_violation()) diag("functoriality", *v);
        return 0;
      });
    } else if (kind == "tower") {
      with_ring(pick_ring(opt, doc), [&](auto ring) {
        io::tower_from_json(ring, doc, "");
        return 0;
      });
    } else if (kind == "bicomplex") {
      with_ring(pick_ring(opt, doc), [&](auto ring) {
        auto x = io::bicomplex_from_json(ring, doc, "");
        if (auto v = x.violation()) diag("bicomplex", *v);
        return 0;
      });
    } else {
      throw ParseError("/kind: unknown document kind '" + kind + "'");
    }
  } catch (const CategoryError& e) {
    diag("category", e.what());
  } catch (const SiteAxiomError& e) {
    diag("site axiom " + e.axiom(), e.witness());
  } catch (const WellDefinednessError& e) {
    diag("well-definedness", e.what());
  } catch (const InvariantError& e) {
    diag("invariant", e.what());
  } catch (const DimensionError& e) {
    diag("shape", e.what());
  }
  rep.data["ok"] = diags.empty();
  rep.data["diagnostics"] = std::move(diags);
  rep.line(rep.data["ok"].get<bool>() ? "ok" : "invalid");
  if (!rep.data["ok"].get<bool>()) rep.status = kInvariant;
  return rep;
}

// example

Report run_example(const BuiltinExample& ex, const Options& opt, std::size_t max_degree) {
  const auto kind = io::kind_of(ex.document);
  Report rep;
  if (kind == "precosheaf") {
    rep = with_ring(pick_ring(opt, ex.document), [&](auto ring) {
      auto d = io::precosheaf_document(ring, ex.document);
      Report out;
      const auto& c = d.site.category();
      out.line(ex.name + ": " + ex.summary);
      json routes = json::object();
      for (auto via : {CechRoute::kCovers, CechRoute::kSieves}) {
        const std::string name = via == CechRoute::kCovers ? "covers" : "sieves";
        std::vector<std::string> forms;
        json degrees = json::array();
        for (std::size_t n = 0; n <= max_degree; ++n) {
          auto h = cech_H_n(d.site, d.at, d.cosheaf, n, via);
          forms.push_back(form(h));
          degrees.push_back(form_json(h));
        }
        routes[name] = std::move(degrees);
        out.line("Cech homology at " + c.object_name(d.at) + " via " + name + ": [" + join(forms, ", ") + "]");
      }
      out.data["cech_homology"] = std::move(routes);
      if (d.cover) {
        std::vector<std::string> forms;
        for (std::size_t n = 0; n <= max_degree; ++n) forms.push_back(form(h_n_cover(d.site, *d.cover, d.cosheaf, n)));
        out.data["cover_homology"] = forms;
        out.line("homology of the listed cover: [" + join(forms, ", ") + "]");
      }
      return out;
    });
  } else if (kind == "tower") {
    rep = with_ring(pick_ring(opt, ex.document), [&](auto ring) {
      auto t = io::tower_from_json(ring, ex.document, "");
      return pro_check(t, 10, PresentedModule<decltype(ring)>::free(ring, 1));
    });
  } else if (kind == "bicomplex") {
    rep = with_ring(pick_ring(opt, ex.document),
                    [&](auto ring) { return spectral(io::bicomplex_from_json(ring, ex.document, ""), "both", 3); });
  } else {
    rep = site_check(ex.document);
  }
  rep.data["command"] = "example";
  rep.data["example"] = ex.name;
  return rep;
}

void emit(const Report& rep, const Input& in, const std::string& ring, const Options& opt, double millis) {
  if (opt.json_output) {
    json out = rep.data;
    out["ring"] = ring;
    out["input_digest"] = in.digest;
    out["status"] = rep.status;
    if (opt.timing) out["timing_ms"] = millis;
    std::cout << out.dump(2) << "\n";
    return;
  }
  for (const auto& l : rep.lines) std::cout << l << "\n";
  std::cout << "ring " << ring << ", input " << in.digest << "\n";
  if (opt.timing) std::cout << "time " << millis << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosheaf: exact cosheaf homology on finite sites"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--ring", opt.ring, "coefficient ring: Z, Q or Fp:<p> (default: the input's ring, else Z)");
  app.add_flag("--json", opt.json_output, "structured JSON report");
  app.add_flag("--timing", opt.timing, "include wall-clock timing in the report");

  std::string file, site_file, constant, constant_cosheaf, at, cover, route, functor = "h0", sieve = "minimal";
  std::string orientation = "both", builtin, g_module, pairing_module, example_name;
  std::size_t max_degree = 2, depth = 3, pages_max = 3, s_max = 3, bound = 10;
  bool list = false;

  auto* site_cmd = app.add_subcommand("site", "site commands");
  site_cmd->require_subcommand(1);
  auto* site_check_cmd = site_cmd->add_subcommand("check", "check a site description against GT1-GT4");
  site_check_cmd->add_option("file", file, "site or precosheaf document")->required();

  auto add_precosheaf_options = [&](CLI::App* cmd) {
    cmd->add_option("--at", at, "base object (default: the whole space, else the last object)");
    cmd->add_option("--cover", cover, "comma-separated cover legs (morphisms, or objects in a thin category)");
  };

  auto* hom_cmd = app.add_subcommand("homology", "Cech homology over covers (cech) or sieves (roos)");
  hom_cmd->add_option("route", route, "cech or roos")->required()->check(CLI::IsMember({"cech", "roos"}));
  hom_cmd->add_option("file", file, "precosheaf document");
  hom_cmd->add_option("--site", site_file, "site document, used with --constant or --constant-cosheaf");
  hom_cmd->add_option("--constant", constant, "constant precosheaf with this value, e.g. Z or Z + Z/2");
  hom_cmd->add_option("--constant-cosheaf", constant_cosheaf, "constant cosheaf with this value");
  hom_cmd->add_option("--max-degree", max_degree, "highest degree")->check(CLI::Range(0, 6));
  add_precosheaf_options(hom_cmd);

  auto* cos_cmd = app.add_subcommand("cosheafify", "plus construction and cosheafification");
  cos_cmd->add_option("file", file, "precosheaf document")->required();

  auto* sat_cmd = app.add_subcommand("satellite", "left satellites from a quasi-projective resolution");
  sat_cmd->add_option("file", file, "precosheaf document")->required();
  sat_cmd->add_option("--functor", functor, "h0 or eval")->check(CLI::IsMember({"h0", "eval"}));
  sat_cmd->add_option("--sieve", sieve, "sieve for h0: minimal, maximal or cover")
      ->check(CLI::IsMember({"minimal", "maximal", "cover"}));
  sat_cmd->add_option("--depth", depth, "resolution depth")->check(CLI::Range(1, 6));
  sat_cmd->add_option("--max-degree", max_degree, "highest degree")->check(CLI::Range(0, 5));
  add_precosheaf_options(sat_cmd);

  auto* sp_cmd = app.add_subcommand("spectral", "spectral sequences of a bicomplex");
  sp_cmd->add_option("file", file, "bicomplex document, or a precosheaf document with a cover")->required();
  sp_cmd->add_option("--orientation", orientation, "vertical, horizontal or both")
      ->check(CLI::IsMember({"vertical", "horizontal", "both"}));
  sp_cmd->add_option("--pages", pages_max, "last finite page to print")->check(CLI::Range(2, 12));
  sp_cmd->add_option("--depth", depth, "resolution depth for precosheaf input")->check(CLI::Range(1, 6));
  sp_cmd->add_option("--s-max", s_max, "Cech degrees for precosheaf input")->check(CLI::Range(1, 6));
  add_precosheaf_options(sp_cmd);

  auto* pro_cmd = app.add_subcommand("pro", "tower diagnostics");
  pro_cmd->require_subcommand(1);
  auto* pro_check_cmd = pro_cmd->add_subcommand("check", "zero, rudimentary and pairing diagnostics up to a bound");
  pro_check_cmd->add_option("file", file, "tower document");
  pro_check_cmd->add_option("--builtin", builtin, "builtin tower: convergentB");
  pro_check_cmd->add_option("--G", g_module, "parameter module of the builtin tower (default Z)");
  pro_check_cmd->add_option("--bound", bound, "level bound N")->check(CLI::Range(1, 40));
  pro_check_cmd->add_option("--pairing", pairing_module, "coefficient module M (default the ring)");

  auto* ex_cmd = app.add_subcommand("example", "run a builtin example");
  ex_cmd->add_option("name", example_name, "example name");
  ex_cmd->add_flag("--list", list, "list the builtin examples");
  ex_cmd->add_option("--max-degree", max_degree, "highest degree")->check(CLI::Range(0, 6));

  auto* val_cmd = app.add_subcommand("validate", "check a document and report diagnostics");
  val_cmd->add_option("file", file, "document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
      auto b = part.find_first_not_of(' '), e = part.find_last_not_of(' ');
      if (b != std::string::npos) out.push_back(part.substr(b, e - b + 1));
    }
    return out;
  };
  // Flags override the document's base object and cover.
  auto with_overrides = [&](json doc) {
    if (!at.empty()) {
      doc["at"] = at;
      if (cover.empty()) doc.erase("cover");
    }
    if (!cover.empty()) doc["cover"] = split(cover);
    return doc;
  };

  const auto start = std::chrono::steady_clock::now();
  try {
    Input in;
    Report rep;
    std::string ring_name;
    if (site_check_cmd->parsed()) {
      in = load_file(file);
      rep = site_check(in.doc);
      ring_name = pick_ring(opt, in.doc).to_string();
    } else if (hom_cmd->parsed()) {
      json doc;
      if (!site_file.empty()) {
        if (constant.empty() == constant_cosheaf.empty()) {
          throw ParseError("--site needs exactly one of --constant and --constant-cosheaf");
        }
        auto site_in = load_file(site_file);
        doc = {{"kind", "precosheaf"}, {"site", site_in.doc.contains("site") ? site_in.doc["site"] : site_in.doc}};
        if (site_in.doc.contains("ring")) doc["ring"] = site_in.doc["ring"];
        in.digest = site_in.digest;
      } else {
        if (file.empty()) throw ParseError("homology needs a precosheaf document or --site");
        in = load_file(file);
        doc = in.doc;
      }
      doc = with_overrides(doc);
      const auto spec = pick_ring(opt, doc);
      ring_name = spec.to_string();
      rep = with_ring(spec, [&](auto ring) {
        json d = doc;
        if (!constant.empty()) d["constant"] = io::module_to_json(module_from_text(ring, constant));
        if (!constant_cosheaf.empty()) d["constant_cosheaf"] = io::module_to_json(module_from_text(ring, constant_cosheaf));
        return homology(io::precosheaf_document(ring, d), route, max_degree);
      });
      in.doc = doc;
    } else if (cos_cmd->parsed()) {
      in = load_file(file);
      const auto spec = pick_ring(opt, in.doc);
      ring_name = spec.to_string();
      rep = with_ring(spec, [&](auto ring) { return cosheafify(io::precosheaf_document(ring, in.doc)); });
    } else if (sat_cmd->parsed()) {
      in = load_file(file);
      const auto doc = with_overrides(in.doc);
      const auto spec = pick_ring(opt, doc);
      ring_name = spec.to_string();
      rep = with_ring(spec, [&](auto ring) {
        return satellite(io::precosheaf_document(ring, doc), functor, sieve, depth, max_degree);
      });
    } else if (sp_cmd->parsed()) {
      in = load_file(file);
      const auto doc = io::kind_of(in.doc) == "bicomplex" ? in.doc : with_overrides(in.doc);
      const auto spec = pick_ring(opt, doc);
      ring_name = spec.to_string();
      const bool resolved = io::kind_of(doc) != "bicomplex";
      rep = with_ring(spec, [&](auto ring) {
        return spectral(bicomplex_of(ring, doc, depth, s_max), orientation, pages_max,
                        resolved ? std::optional<std::size_t>(std::min(s_max, depth)) : std::nullopt);
      });
    } else if (pro_check_cmd->parsed()) {
      std::optional<json> doc;
      if (!file.empty()) {
        in = load_file(file);
        doc = in.doc;
      } else {
        if (builtin.empty()) throw ParseError("pro check needs a tower document or --builtin");
        in = load_json({{"builtin", builtin}, {"G", g_module.empty() ? "Z" : g_module}});
      }
      const auto spec = pick_ring(opt, doc ? *doc : json::object());
      ring_name = spec.to_string();
      rep = with_ring(spec, [&](auto ring) {
        auto t = tower_of(ring, doc, builtin, g_module);
        auto m = pairing_module.empty() ? PresentedModule<decltype(ring)>::free(ring, 1) : module_from_text(ring, pairing_module);
        return pro_check(t, bound, m);
      });
    } else if (ex_cmd->parsed()) {
      if (list || example_name.empty()) {
        json names = json::array();
        for (const auto& e : builtin_examples()) {
          rep.line(e.name + ": " + e.summary);
          names.push_back({{"name", e.name}, {"summary", e.summary}});
        }
        rep.data["command"] = "example --list";
        rep.data["examples"] = std::move(names);
        in = load_json(rep.data);
        ring_name = opt.ring.empty() ? "Z" : RingSpec::parse(opt.ring).to_string();
      } else {
        auto ex = find_example(example_name);
        if (!ex) throw ParseError("unknown example '" + example_name + "' (see: example --list)");
        in = load_json(ex->document);
        ring_name = pick_ring(opt, ex->document).to_string();
        rep = run_example(*ex, opt, max_degree);
      }
    } else if (val_cmd->parsed()) {
      in = load_file(file);
      ring_name = pick_ring(opt, in.doc).to_string();
      rep = validate(in.doc, opt);
    }
    const double millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    emit(rep, in, ring_name, opt, millis);
    return rep.status;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const SiteAxiomError& e) {
    std::cerr << "site error: axiom " << e.axiom() << " fails: " << e.witness() << "\n";
    return kInvariant;
  } catch (const CategoryError& e) {
    std::cerr << "category error: " << e.what() << "\n";
    return kInvariant;
  } catch (const WellDefinednessError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const NotACosheafError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const MissingPullbackError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
