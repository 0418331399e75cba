#include "doctest.h"

#include <cmath>
#include <limits>

#include "support/errors.hpp"
#include "support/gen.hpp"
#include "support/transport.hpp"
#include "tlsys/behavioral.hpp"
#include "tlsys/parallel.hpp"
#include "tlsys/sampling.hpp"

using namespace tlsys;

namespace {

const DivergenceKind kAll[] = {DivergenceKind::kl, DivergenceKind::hellinger, DivergenceKind::tv, DivergenceKind::w1,
                               DivergenceKind::mmd};

EmpiricalMeasure on_range(std::vector<double> p) {
  const auto n = p.size();
  return EmpiricalMeasure(integer_range("S", n), std::move(p));
}

LearningSystem full(const std::string& name, std::size_t nx, std::size_t ny) {
  return LearningSystem(name, HypothesisClass::all_functions(integer_range("X", nx), integer_range("Y", ny)));
}

SystemPack pack(const std::string& name, std::vector<double> px, std::vector<std::size_t> f, std::size_t ny,
                std::size_t n, std::uint64_t seed) {
  const auto xs = integer_range("X", px.size());
  DeclaredMeasures m{EmpiricalMeasure(xs, std::move(px)), ConditionalMeasure::from_function(xs, integer_range("Y", ny), f)};
  SystemPack p{full(name, xs.size(), ny), m, f, {}, n, {}};
  p.data = sample_dataset(m, n, seed);
  return p;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("seeds are reproducible and separate roles") {
    CHECK(derive_seed(1, "a", "data") == derive_seed(1, "a", "data"));
    CHECK(derive_seed(1, "a", "data") != derive_seed(1, "a", "holdout"));
    CHECK(derive_seed(1, "a", "data") != derive_seed(1, "b", "data"));
    CHECK(derive_seed(1, "a", "data") != derive_seed(2, "a", "data"));
  }

  TEST_CASE("inverse cdf skips empty cells") {
    CHECK(inverse_cdf({0.0, 0.5, 0.5}, 0.0) == 1);
    CHECK(inverse_cdf({0.5, 0.0, 0.5}, 0.5) == 2);
    CHECK(inverse_cdf({0.5, 0.5, 0.0}, 0.9999999999999999) == 1);
  }

  TEST_CASE("frequencies approach the declared measures") {
    const auto xs = integer_range("X", 3), ys = integer_range("Y", 2);
    DeclaredMeasures m{EmpiricalMeasure(xs, {0.2, 0.3, 0.5}),
                       ConditionalMeasure(xs, ys, {{1.0, 0.0}, {0.25, 0.75}, {0.5, 0.5}})};
    auto d = sample_dataset(m, 40000, 5);
    CHECK(d.size() == 40000);
    auto px = estimate_measure(d, xs, ys, Over::x);
    CHECK(px[0] == doctest::Approx(0.2).epsilon(0.03));
    CHECK(px[2] == doctest::Approx(0.5).epsilon(0.03));
    auto post = estimate_posterior(d, xs, ys);
    CHECK(post.prob(0, 1) == 0.0);
    CHECK(post.prob(1, 1) == doctest::Approx(0.75).epsilon(0.03));
    CHECK(sample_dataset(m, 50, 9).examples == sample_dataset(m, 50, 9).examples);
  }

  TEST_CASE("draw prefers the pack's sampler") {
    auto p = pack("P", {0.5, 0.5}, {0, 1}, 2, 7, 1);
    CHECK(draw(p, 3).size() == 7);
    p.sampler = [](std::uint64_t s) {
      Dataset d;
      d.examples.push_back({static_cast<std::size_t>(s % 2), 0});
      return d;
    };
    CHECK(draw(p, 3).size() == 1);
    p.sampler = nullptr;
    p.measures.reset();
    CHECK(code_of([&] { draw(p, 3); }) == ErrorCode::MissingMeasure);
  }
}

TEST_SUITE("estimate_measure") {
  const FiniteSet xs("X", {Atom("a"), Atom("b")});
  const FiniteSet ys = integer_range("Y", 2);
  const Dataset d{{{0, 0}, {0, 0}, {1, 1}, {1, 1}}, ""};

  TEST_CASE("symmetric counts") {
    auto p = estimate_measure(d, xs, ys, Over::x);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    auto post = estimate_posterior(d, xs, ys);
    CHECK(post.prob(0, 0) == 1.0);
    CHECK(post.prob(1, 1) == 1.0);
    auto j = estimate_measure(d, xs, ys, Over::xy);
    CHECK(j.support()[0] == Atom("(a,0)"));
    CHECK(j[3] == 0.5);
  }

  TEST_CASE("additive smoothing") {
    Dataset four{{{0, 0}, {0, 0}, {0, 0}, {0, 0}}, ""};
    auto p = estimate_measure(four, xs, ys, Over::y, 0.01);
    CHECK(p[0] == doctest::Approx(4.01 / 4.02).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.01 / 4.02).epsilon(1e-14));
  }

  TEST_CASE("weights and empty rows") {
    Dataset w{{{0, 1, Origin::source, 3.0}, {0, 0, Origin::target, 1.0}}, ""};
    auto post = estimate_posterior(w, xs, ys);
    CHECK(post.prob(0, 1) == 0.75);
    CHECK(post.prob(1, 0) == 0.5);
    CHECK(code_of([&] { estimate_measure(Dataset{}, xs, ys, Over::x); }) == ErrorCode::EmptyDataset);
  }

  TEST_CASE("joint factorizes into marginal and posterior") {
    gen::Rng rng(17);
    for (int i = 0; i < 100; ++i) {
      const auto nx = gen::uniform(rng, 1, 5), ny = gen::uniform(rng, 1, 4);
      auto d = gen::random_dataset(rng, nx, ny, gen::uniform(rng, 1, 30));
      const auto xs = integer_range("X", nx), ys = integer_range("Y", ny);
      auto joint = estimate_measure(d, xs, ys, Over::xy);
      auto m = estimate_measures(d, xs, ys);
      auto prod = joint_of(m.marginal, m.posterior);
      for (std::size_t k = 0; k < joint.size(); ++k) CHECK(std::abs(joint[k] - prod[k]) <= 1e-12);
    }
  }
}

TEST_SUITE("divergence") {
  TEST_CASE("reference values") {
    auto p = on_range({0.8, 0.2}), q = on_range({0.3, 0.7});
    double tv = 0.0;
    for (std::size_t i = 0; i < 2; ++i) tv += 0.5 * std::abs(p[i] - q[i]);
    CHECK(divergence(p, q, DivergenceKind::tv) == doctest::Approx(tv).epsilon(1e-15));
    CHECK(tv == doctest::Approx(0.5));
    auto a = EmpiricalMeasure::point_mass(integer_range("S", 4), 0);
    auto b = EmpiricalMeasure::point_mass(integer_range("S", 4), 3);
    CHECK(divergence(a, b, DivergenceKind::w1) == 3.0);
    CHECK(divergence(a, b, DivergenceKind::hellinger) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::isinf(divergence(a, b, DivergenceKind::kl)));
    CHECK(divergence(p, q, DivergenceKind::kl) ==
          doctest::Approx(0.8 * std::log(0.8 / 0.3) + 0.2 * std::log(0.2 / 0.7)));
    CHECK(divergence(p, q, DivergenceKind::mmd) == doctest::Approx(std::sqrt(2 * 0.25)));
  }

  TEST_CASE("alignment by element") {
    FiniteSet ab("S", {Atom("a"), Atom("b")}), ba("S", {Atom("b"), Atom("a")});
    EmpiricalMeasure p(ab, {0.25, 0.75}), q(ba, {0.75, 0.25});
    CHECK(divergence(p, q, DivergenceKind::tv) == 0.0);
    EmpiricalMeasure r(FiniteSet("S", {Atom("a"), Atom("c")}), {0.5, 0.5});
    CHECK(code_of([&] { divergence(p, r, DivergenceKind::tv); }) == ErrorCode::SupportMismatch);
    CHECK(code_of([&] { divergence(p, q, DivergenceKind::w1); }) == ErrorCode::MissingOrder);
    p.set_coordinates({0.0, 2.5});
    CHECK(divergence(p, EmpiricalMeasure(ab, {0.75, 0.25}), DivergenceKind::w1) == doctest::Approx(1.25));
  }

  TEST_CASE("axioms on random pairs") {
    gen::Rng rng(101);
    bool kl_asymmetric = false;
    for (int i = 0; i < 200; ++i) {
      const auto n = gen::uniform(rng, 1, 10);
      const double z = i % 3 == 0 ? 0.3 : 0.0;
      auto p = on_range(gen::simplex(rng, n, z)), q = on_range(gen::simplex(rng, n, z)),
           r = on_range(gen::simplex(rng, n, z));
      for (auto k : kAll) {
        const double pq = divergence(p, q, k);
        CHECK(pq >= 0.0);
        CHECK(divergence(p, p, k) <= 1e-12);
        if (!is_metric(k)) continue;
        CHECK(std::abs(pq - divergence(q, p, k)) <= 1e-12);
        CHECK(divergence(p, r, k) <= pq + divergence(q, r, k) + 1e-12);
      }
      CHECK(divergence(p, q, DivergenceKind::tv) <= 1.0);
      CHECK(divergence(p, q, DivergenceKind::hellinger) <= 1.0);
      const double a = divergence(p, q, DivergenceKind::kl), b = divergence(q, p, DivergenceKind::kl);
      if (std::isfinite(a) && std::isfinite(b) && std::abs(a - b) > 1e-6) kl_asymmetric = true;
    }
    CHECK(kl_asymmetric);
  }

  TEST_CASE("W1 equals minimum-cost transport") {
    gen::Rng rng(202);
    for (int i = 0; i < 200; ++i) {
      const auto n = gen::uniform(rng, 1, 6);
      auto pv = gen::simplex(rng, n, 0.25), qv = gen::simplex(rng, n, 0.25);
      std::vector<double> c(n);
      for (auto& v : c) v = std::floor(gen::real(rng) * 20.0) / 2.0 - 5.0;
      EmpiricalMeasure p(integer_range("S", n), pv), q(integer_range("S", n), qv);
      p.set_coordinates(c);
      CHECK(std::abs(divergence(p, q, DivergenceKind::w1) - oracle::min_cost_transport(pv, qv, c)) <= 1e-9);
    }
  }

  TEST_CASE("kernels") {
    auto p = on_range({0.5, 0.5, 0.0}), q = on_range({0.0, 0.5, 0.5});
    CHECK(code_of([&] { divergence(p, q, DivergenceKind::mmd, {KernelKind::gaussian, std::nullopt, {}}); }) ==
          ErrorCode::MissingKernel);
    p.set_embedding({{0.0}, {1.0}, {2.0}});
    // automatic picks the gaussian once an embedding is present; median distance 1
    const auto g = kernel_matrix(p, {});
    CHECK(g[0][1] == doctest::Approx(std::exp(-0.5)));
    CHECK(g[0][2] == doctest::Approx(std::exp(-2.0)));
    double s = 0;
    const double d[] = {0.5, 0.0, -0.5};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += d[i] * g[i][j] * d[j];
    CHECK(divergence(p, q, DivergenceKind::mmd) == doctest::Approx(std::sqrt(s)));
    KernelSpec m{KernelKind::matrix, std::nullopt, {{1, 0}, {0, 1}}};
    CHECK(code_of([&] { divergence(p, q, DivergenceKind::mmd, m); }) == ErrorCode::MissingKernel);

    gen::Rng rng(303);
    for (int i = 0; i < 100; ++i) {
      const auto n = gen::uniform(rng, 1, 8);
      auto a = on_range(gen::simplex(rng, n)), b = on_range(gen::simplex(rng, n));
      std::vector<std::vector<double>> e(n, std::vector<double>(2));
      for (auto& v : e) v = {gen::real(rng), gen::real(rng)};
      a.set_embedding(e);
      CHECK(divergence(a, a, DivergenceKind::mmd) <= 1e-12);
      CHECK(divergence(a, b, DivergenceKind::mmd) >= 0.0);
    }
  }

  TEST_CASE("names") {
    for (auto k : kAll) CHECK(parse_divergence(to_string(k)) == k);
    CHECK(parse_over("Y|X") == Over::y_given_x);
    CHECK_FALSE(is_metric(DivergenceKind::kl));
  }
}

TEST_SUITE("transfer_distance") {
  const auto xs = integer_range("X", 3);
  const auto ys = integer_range("Y", 2);

  TEST_CASE("identical behaviors") {
    DeclaredMeasures m{EmpiricalMeasure(xs, {0.2, 0.3, 0.5}), ConditionalMeasure(xs, ys, {{1, 0}, {0.5, 0.5}, {0.1, 0.9}})};
    for (auto on : {Over::x, Over::y, Over::y_given_x})
      for (auto k : kAll) CHECK(transfer_distance(m, m, on, k) == 0.0);
    for (auto k : kAll)
      if (k != DivergenceKind::w1) CHECK(transfer_distance(m, m, Over::xy, k) == 0.0);
  }

  TEST_CASE("conditional rows under the target marginal") {
    DeclaredMeasures s{EmpiricalMeasure(xs, {0.2, 0.3, 0.5}), ConditionalMeasure(xs, ys, {{1, 0}, {0.5, 0.5}, {0.1, 0.9}})};
    DeclaredMeasures t{EmpiricalMeasure(xs, {0.5, 0.5, 0.0}), ConditionalMeasure(xs, ys, {{0, 1}, {0.5, 0.5}, {1, 0}})};
    CHECK(transfer_distance(s, t, Over::y_given_x, DivergenceKind::tv) == doctest::Approx(0.5));
    CHECK(transfer_distance(s, t, Over::x, DivergenceKind::tv) == doctest::Approx(0.5));
  }

  TEST_CASE("disjoint inputs need an alignment") {
    const FiniteSet fs("F", {Atom(32), Atom(50), Atom(68)});
    DeclaredMeasures s{EmpiricalMeasure(xs, {0.2, 0.3, 0.5}), ConditionalMeasure::from_function(xs, ys, {0, 1, 1})};
    DeclaredMeasures t{EmpiricalMeasure(fs, {0.2, 0.3, 0.5}), ConditionalMeasure::from_function(fs, ys, {0, 1, 1})};
    CHECK(code_of([&] { transfer_distance(s, t, Over::x, DivergenceKind::tv); }) == ErrorCode::SupportMismatch);
    Alignment a{DataMap{SetMap::identity(xs), SetMap::identity(ys)}, DataMap{SetMap{fs, xs, {0, 1, 2}}, SetMap::identity(ys)}};
    for (auto on : {Over::x, Over::y, Over::xy, Over::y_given_x})
      CHECK(transfer_distance(s, t, on, DivergenceKind::tv, &a) == 0.0);
  }

  TEST_CASE("pushforward") {
    auto p = EmpiricalMeasure(xs, {0.2, 0.3, 0.5});
    auto q = pushforward(p, SetMap{xs, ys, {0, 1, 0}});
    CHECK(q[0] == doctest::Approx(0.7));
  }
}

TEST_SUITE("bound_check") {
  TEST_CASE("complexity term") {
    CHECK(complexity_term(1, 40) == doctest::Approx(std::sqrt(std::log(20.0) / 80.0)).epsilon(1e-14));
    CHECK(complexity_term(8, 10, 0.1) == doctest::Approx(std::sqrt((std::log(8.0) + std::log(10.0)) / 20.0)));
    CHECK(std::isinf(complexity_term(4, 0)));
  }

  TEST_CASE("identical systems with large samples") {
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto s = pack("S", {0.1, 0.2, 0.3, 0.4}, {0, 1, 1, 0}, 2, 200, derive_seed(seed, "S", "data"));
      auto t = pack("T", {0.1, 0.2, 0.3, 0.4}, {0, 1, 1, 0}, 2, 200, derive_seed(seed, "T", "data"));
      auto r = bound_check(TransferRecipe{}, s, t);
      CHECK(r.delta_t < 0.2);
      CHECK(r.theta_count == 16);
      CHECK(r.n == 400);
      CHECK(r.complexity_c == doctest::Approx(complexity_term(16, 400)));
      CHECK(r.holds == (r.epsilon_t <= r.rhs()));
      holds += r.holds;
    }
    CHECK(holds >= 18);
  }

  TEST_CASE("declared distance and flipped source") {
    auto s = pack("S", {0.7, 0.1, 0.1, 0.1}, {1, 0, 0, 1}, 2, 40, 1);
    auto t = pack("T", {0.1, 0.1, 0.1, 0.7}, {0, 1, 1, 0}, 2, 4, 2);
    BoundOptions o;
    o.delta_source = DeltaSource::declared;
    auto r = bound_check(TransferRecipe{}, s, t, o);
    CHECK(r.delta_t == doctest::Approx(0.6));
    CHECK(r.epsilon_s <= 0.3);
    CHECK(r.delta_source == DeltaSource::declared);
  }

  TEST_CASE("heterogeneous pair") {
    auto s = pack("S", {0.5, 0.5}, {0, 1}, 2, 10, 1);
    auto t = pack("T", {0.5, 0.5}, {0, 1}, 3, 10, 2);
    CHECK(code_of([&] { bound_check(TransferRecipe{}, s, t); }) == ErrorCode::HeterogeneousSetting);
  }
}

TEST_SUITE("behavioral_transferability") {
  TEST_CASE("identical copy and empty universe") {
    auto s = pack("S", {0.25, 0.25, 0.25, 0.25}, {0, 1, 1, 0}, 2, 400, 1);
    std::vector<SystemPack> u{pack("copy", {0.25, 0.25, 0.25, 0.25}, {0, 1, 1, 0}, 2, 400, 2)};
    BehavioralOptions o;
    o.epsilon_star = 1.0;
    auto n = behavioral_transferability(s, u, Role::source, o);
    CHECK(n.cardinality() == 1);
    CHECK(behavioral_transferability(s, std::span<const SystemPack>{}, Role::source, o).cardinality() == 0);
  }

  TEST_CASE("distance-only threshold on a shift ladder") {
    auto base = pack("T", {0.4, 0.4, 0.1, 0.1}, {0, 1, 1, 0}, 2, 10, 1);
    std::vector<SystemPack> u;
    for (int k = 0; k <= 5; ++k) {
      const double a = 0.1 * k;
      const double lo = 0.4 * (1 - a) + 0.1 * a, hi = 0.1 * (1 - a) + 0.4 * a;
      u.push_back(pack("a" + std::to_string(k), {lo, lo, hi, hi}, {0, 1, 1, 0}, 2, 10, 2 + k));
    }
    u.push_back(pack("wide", {0.5, 0.5}, {0, 1}, 2, 10, 9));
    BehavioralOptions o;
    o.mode = BehavioralMode::distance_only;
    o.delta_star = 0.25;
    for (auto role : {Role::source, Role::target}) {
      auto n = behavioral_transferability(base, u, role, o);
      std::size_t expect = 0;
      for (std::size_t i = 0; i + 1 < u.size(); ++i)
        expect += transfer_distance(*u[i].measures, *base.measures, Over::x, DivergenceKind::tv) < 0.25;
      CHECK(n.cardinality() == expect);
      CHECK(expect == 5);
      REQUIRE(n.skipped.size() == 1);
      CHECK(n.skipped[0].name == "wide");
    }
  }

  TEST_CASE("members missing truth are skipped") {
    auto s = pack("S", {0.5, 0.5}, {0, 1}, 2, 10, 1);
    auto m = s;
    m.truth.reset();
    std::vector<SystemPack> u{m};
    auto n = behavioral_transferability(s, u, Role::source);
    CHECK(n.entries.empty());
    CHECK(n.skipped.size() == 1);
  }
}

TEST_SUITE("parallel_map") {
  TEST_CASE("results by index and errors by lowest index") {
    auto v = parallel_map(100, [](std::size_t i) { return i * i; }, 4);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == i * i);
    try {
      parallel_map(50, [](std::size_t i) -> int { if (i % 7 == 3) throw std::runtime_error(std::to_string(i)); return 0; }, 4);
      FAIL("no exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "3");
    }
  }
}
