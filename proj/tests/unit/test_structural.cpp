#include "doctest.h"

#include <limits>
#include <set>
#include <tuple>

#include "support/errors.hpp"
#include "support/gen.hpp"
#include "tlsys/structural.hpp"

using namespace tlsys;

namespace {

using Shape = std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>;

FiniteSystem graph(std::size_t ny, const std::vector<std::size_t>& f) {
  return function_graph(integer_range("X", f.size()), integer_range("Y", ny), f);
}

std::vector<std::size_t> decode(std::size_t v, std::size_t n, std::size_t base) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = v % base;
    v /= base;
  }
  return out;
}

std::size_t power(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

bool onto_all(const std::vector<std::size_t>& v, std::size_t n) {
  std::vector<bool> hit(n, false);
  for (auto i : v) hit[i] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

// Every pair of total maps, no pruning.
template <class F>
void brute_onto(const FiniteSystem& s, std::size_t nx2, std::size_t ny2, F&& visit) {
  const auto pairs = s.io_pairs();
  const std::size_t nx = s.input_cardinality(), ny = s.output_cardinality();
  for (std::size_t a = 0; a < power(nx2, nx); ++a) {
    const auto rx = decode(a, nx, nx2);
    if (!onto_all(rx, nx2)) continue;
    for (std::size_t b = 0; b < power(ny2, ny); ++b) {
      const auto ry = decode(b, ny, ny2);
      if (onto_all(ry, ny2)) visit(rx, ry, pairs);
    }
  }
}

bool has_onto(const FiniteSystem& s, std::size_t nx2, std::size_t ny2, const std::vector<std::size_t>& g) {
  bool found = false;
  brute_onto(s, nx2, ny2, [&](const auto& rx, const auto& ry, const auto& pairs) {
    if (found) return;
    bool ok = true;
    for (const auto& [x, y] : pairs) ok = ok && ry[y] == g[rx[x]];
    found = ok;
  });
  return found;
}

std::set<Shape> oracle_candidates(const FiniteSystem& s, const FiniteSystem& t, std::size_t bound) {
  std::set<Shape> out;
  for (std::size_t nx = 1; nx <= bound; ++nx)
    for (std::size_t ny = 1; ny <= bound; ++ny)
      for (std::size_t code = 0; code < power(ny, nx); ++code) {
        const auto g = decode(code, nx, ny);
        if (has_onto(s, nx, ny, g) && has_onto(t, nx, ny, g)) out.insert({nx, ny, fiber_shape(g, ny)});
      }
  return out;
}

std::set<Shape> shapes_of(const std::vector<StructureCandidate>& cs) {
  std::set<Shape> out;
  for (const auto& c : cs) out.insert({c.nx, c.ny, fiber_shape(c.g, c.ny)});
  return out;
}

FiniteSystem random_relation(gen::Rng& rng, std::size_t nx, std::size_t ny) {
  std::vector<FiniteSet> comps{integer_range("X", nx), integer_range("Y", ny)};
  return FiniteSystem(comps, gen::random_relation(rng, comps, 0.5), IoPartition{{0}, {1}});
}

LearningSystem full(const std::string& name, std::size_t nx, std::size_t ny) {
  return LearningSystem(name, HypothesisClass::all_functions(integer_range("X", nx), integer_range("Y", ny)));
}

SystemPack function_pack(const std::string& name, std::size_t ny, std::vector<std::size_t> f) {
  const auto nx = f.size();
  SystemPack p{full(name, nx, ny), std::nullopt, f, {}, 0, {}};
  for (std::size_t x = 0; x < nx; ++x) p.data.examples.push_back({x, f[x]});
  p.sample_size = nx;
  return p;
}

}  // namespace

TEST_SUITE("transfer_roughness") {
  TEST_CASE("identity on a system is minimal") {
    auto s = graph(2, {0, 1, 1});
    auto r = transfer_roughness(s, s, Morphism{MapTable::identity_map(3), MapTable::identity_map(2)});
    CHECK(r.minimal);
    CHECK(r.roughness_ratio == 1.0);
    CHECK(r.relation_preserving);
    CHECK(r.ratio_is_summary);
  }

  TEST_CASE("collapse of all inputs") {
    auto s = graph(2, {0, 0, 0});
    auto t = graph(2, {0});
    auto r = transfer_roughness(s, t, Morphism{MapTable::total_map({0, 0, 0}, 1), MapTable::identity_map(2)});
    CHECK(r.quotient.input_classes() == 1);
    CHECK(r.roughness_ratio < 1.0);
    CHECK_FALSE(r.minimal);
    CHECK(r.properties.x.surjective);
    CHECK_FALSE(r.properties.x.injective);
  }

  TEST_CASE("partial injective map into a larger target") {
    auto s = graph(2, {0, 1});
    auto t = graph(2, {0, 1, 1});
    Morphism m{MapTable{3, {0, std::nullopt}}, MapTable::identity_map(2)};
    auto r = transfer_roughness(s, t, m);
    CHECK(r.properties.x.partial);
    CHECK(r.properties.x.injective);
    CHECK_FALSE(r.properties.x.surjective);
    CHECK(r.relation_preserving);
    CHECK_FALSE(r.minimal);
  }

  TEST_CASE("maps of the wrong shape") {
    auto s = graph(2, {0, 1});
    CHECK(code_of([&] { transfer_roughness(s, s, Morphism{MapTable::identity_map(3), MapTable::identity_map(2)}); }) ==
          ErrorCode::IncompatibleMorphism);
  }

  TEST_CASE("dropping an input component is one-directional") {
    // X_S = {0,1}^2 with f_S(a, b) = f_T(a); the target sees only a.
    auto s = graph(2, {0, 0, 1, 1});
    auto t = graph(2, {0, 1});
    CHECK_FALSE(enumerate_morphisms(s, t, MorphismRequirement::onto()).empty());
    CHECK(enumerate_morphisms(t, s, MorphismRequirement::onto()).empty());
  }
}

TEST_SUITE("homomorphic_structures") {
  TEST_CASE("a system shares its own shape with identity witnesses") {
    auto s = graph(2, {0, 0, 1});
    auto r = homomorphic_structures(s, s);
    auto it = std::find_if(r.candidates.begin(), r.candidates.end(),
                           [](const auto& c) { return c.nx == 3 && c.ny == 2 && c.g == std::vector<std::size_t>{0, 0, 1}; });
    REQUIRE(it != r.candidates.end());
    CHECK(it->source_witness.x_map.identity());
    CHECK(it->source_witness.y_map.identity());
    CHECK(it->target_witness == it->source_witness);
  }

  TEST_CASE("one-point collapse is shared") {
    auto r = homomorphic_structures(graph(2, {0, 1}), graph(3, {2, 0, 1}), {2, 16});
    CHECK(shapes_of(r.candidates).count(Shape{1, 1, {1}}) == 1);
    for (const auto& c : r.candidates) {
      CHECK(c.source_witness.properties().joint.surjective);
      CHECK(c.target_witness.properties().joint.surjective);
    }
  }

  TEST_CASE("matches exhaustive double enumeration") {
    gen::Rng rng(41);
    for (int i = 0; i < 25; ++i) {
      auto s = random_relation(rng, gen::uniform(rng, 1, 3), gen::uniform(rng, 1, 3));
      auto t = random_relation(rng, gen::uniform(rng, 1, 3), gen::uniform(rng, 1, 2));
      auto r = homomorphic_structures(s, t, {3, 16});
      CHECK(shapes_of(r.candidates) == oracle_candidates(s, t, 3));
      CHECK(shapes_of(r.candidates).size() == r.candidates.size());
    }
  }

  TEST_CASE("renaming the carriers does not change the result") {
    gen::Rng rng(43);
    for (int i = 0; i < 20; ++i) {
      const auto nx = gen::uniform(rng, 1, 4), ny = gen::uniform(rng, 1, 3);
      auto s = random_relation(rng, nx, ny);
      std::vector<std::size_t> perm(nx);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<Atom> renamed;
      for (std::size_t k = 0; k < nx; ++k) renamed.emplace_back("e" + std::to_string(perm[k]));
      std::set<Tuple> tuples;
      for (const auto& tup : s.tuples()) tuples.insert({perm[tup[0]], tup[1]});
      FiniteSystem s2({FiniteSet("X", renamed), s.component(1)}, tuples, IoPartition{{0}, {1}});
      auto t = graph(2, {0, 1, 1});
      CHECK(shapes_of(homomorphic_structures(s, t, {3, 16}).candidates) ==
            shapes_of(homomorphic_structures(s2, t, {3, 16}).candidates));
    }
  }

  TEST_CASE("bound") {
    auto s = graph(2, {0, 1});
    CHECK(code_of([&] { homomorphic_structures(s, s, {5, 16}); }) == ErrorCode::CapExceeded);
  }
}

TEST_SUITE("valid and useful structures") {
  TEST_CASE("target structure is valid with the identity output map") {
    auto t = graph(2, {0, 0, 1});
    auto r = valid_structures(homomorphic_structures(t, t), t, integer_range("Y", 2));
    auto it = std::find_if(r.valid.begin(), r.valid.end(), [](const auto& c) { return c.nx == 3 && c.ny == 2; });
    REQUIRE(it != r.valid.end());
    CHECK(*it->output_map == std::vector<std::size_t>{0, 1});
    CHECK(valid_structures(StructureSearchReport{}, t, integer_range("Y", 2)).valid.empty());
  }

  TEST_CASE("validity matches enumeration of all witnesses and output maps") {
    gen::Rng rng(47);
    for (int i = 0; i < 20; ++i) {
      auto s = random_relation(rng, gen::uniform(rng, 1, 3), gen::uniform(rng, 1, 2));
      const std::size_t nyt = gen::uniform(rng, 1, 3);
      auto t = random_relation(rng, gen::uniform(rng, 1, 3), nyt);
      auto r = valid_structures(homomorphic_structures(s, t, {3, 16}), t, integer_range("Y", nyt), {3, 16});
      std::set<Shape> expect;
      for (const auto& c : r.candidates) {
        bool ok = false;
        brute_onto(t, c.nx, c.ny, [&](const auto& rx, const auto& ry, const auto& pairs) {
          bool preserving = true;
          for (const auto& [x, y] : pairs) preserving = preserving && ry[y] == c.g[rx[x]];
          if (!preserving) return;
          for (std::size_t code = 0; code < power(nyt, c.ny) && !ok; ++code) {
            const auto my = decode(code, c.ny, nyt);
            bool consistent = true;
            for (const auto& [x, y] : pairs) consistent = consistent && my[c.g[rx[x]]] == y;
            ok = consistent;
          }
        });
        if (ok) expect.insert({c.nx, c.ny, fiber_shape(c.g, c.ny)});
      }
      CHECK(shapes_of(r.valid) == expect);
      for (const auto& c : r.valid) CHECK(is_relation_preserving(t, c.structure, c.target_witness));
    }
  }

  TEST_CASE("useful keeps what generalizes, smallest error first") {
    auto src = function_pack("S", 2, {0, 1, 1});
    auto tgt = function_pack("T", 2, {0, 1, 1});
    auto r = structure_search(src, tgt, std::numeric_limits<double>::infinity());
    CHECK(r.useful.size() == r.valid.size());
    for (std::size_t i = 1; i < r.useful.size(); ++i) CHECK(*r.useful[i - 1].epsilon <= *r.useful[i].epsilon);
    CHECK(*r.useful.front().epsilon == 0.0);
    auto tight = structure_search(src, tgt, 0.0);
    CHECK_FALSE(tight.useful.empty());
    CHECK(tight.useful.size() <= tight.valid.size());
    CHECK(tight.valid.size() <= tight.candidates.size());
  }

  TEST_CASE("one-point structure is useless on a nonconstant target") {
    auto src = function_pack("S", 2, {0, 1, 1});
    auto tgt = function_pack("T", 2, {0, 1, 1});
    auto c = canonical_candidate(1, {1});
    c.source_witness = Morphism{MapTable::total_map({0, 0, 0}, 1), MapTable::total_map({0, 0}, 1)};
    c.target_witness = c.source_witness;
    c.output_map = std::vector<std::size_t>{1};
    StructureSearchReport r;
    r.valid = {c};
    const double best_constant = 1.0 / 3.0;
    auto u = useful_structures(r, latent_transfer_runner(src, tgt), best_constant - 1e-9);
    CHECK(u.useful.empty());
    CHECK(*u.valid[0].epsilon >= best_constant);
  }
}

TEST_SUITE("structural_transferability") {
  TEST_CASE("copy counts, noise source does not") {
    auto t = function_pack("T", 2, {0, 1, 1, 0});
    SystemPack noise{full("noise", 4, 2), std::nullopt, std::nullopt, {}, 8, {}};
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 2; ++y) noise.data.examples.push_back({x, y});
    std::vector<SystemPack> u{function_pack("copy", 2, {0, 1, 1, 0}), noise};
    StructuralOptions o;
    o.epsilon_star = 0.25;
    auto n = structural_transferability(t, u, Role::target, o);
    CHECK(n.cardinality() == 1);
    CHECK(n.members() == std::vector<std::size_t>{0});
    CHECK(std::isinf(n.entries[1].value));
    CHECK(structural_transferability(t, std::span<const SystemPack>{}, Role::source, o).cardinality() == 0);
    auto s = structural_transferability(t, std::span<const SystemPack>(u.data(), 1), Role::source, o);
    CHECK(s.cardinality() == 1);
  }
}
