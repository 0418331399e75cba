#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "support/gen.hpp"
#include "tlsys/learning.hpp"

using namespace tlsys;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvariantViolation;
}

// θ1 = all zeros, θ2 = all ones on X = {0,1,2}.
LearningSystem constant_pair() {
  HypothesisClass h(gen::symbols("Theta", "theta", 2), integer_range("X", 3), integer_range("Y", 2),
                    {0, 0, 0, 1, 1, 1});
  return LearningSystem("pair", h);
}

Dataset pairs(std::initializer_list<std::pair<std::size_t, std::size_t>> xs) {
  Dataset d;
  for (auto [x, y] : xs) d.examples.push_back({x, y});
  return d;
}

}  // namespace

TEST_SUITE("hypothesis classes") {
  TEST_CASE("all functions in lexicographic order") {
    auto h = HypothesisClass::all_functions(integer_range("X", 2), integer_range("Y", 3));
    CHECK(h.theta().size() == 9);
    CHECK(std::vector<std::size_t>(h.row(0).begin(), h.row(0).end()) == std::vector<std::size_t>{0, 0});
    CHECK(std::vector<std::size_t>(h.row(1).begin(), h.row(1).end()) == std::vector<std::size_t>{0, 1});
    CHECK(std::vector<std::size_t>(h.row(3).begin(), h.row(3).end()) == std::vector<std::size_t>{1, 0});
    CHECK(code_of([] { HypothesisClass::all_functions(integer_range("X", 17), integer_range("Y", 2)); }) ==
          ErrorCode::CapExceeded);
  }
  TEST_CASE("table must be total and in range") {
    CHECK(code_of([] { HypothesisClass(integer_range("T", 2), integer_range("X", 2), integer_range("Y", 2), {0, 1, 0}); }) ==
          ErrorCode::ArityMismatch);
    CHECK(code_of([] { HypothesisClass(integer_range("T", 1), integer_range("X", 1), integer_range("Y", 2), {2}); }) ==
          ErrorCode::UnknownElement);
  }
}

TEST_SUITE("empirical_risk") {
  TEST_CASE("perfect hypothesis") {
    auto sys = constant_pair();
    CHECK(empirical_risk(pairs({{0, 0}, {2, 0}}), 0, sys) == 0.0);
  }
  TEST_CASE("one error in four points") {
    auto sys = constant_pair();
    CHECK(empirical_risk(pairs({{0, 0}, {1, 0}, {2, 0}, {2, 1}}), 0, sys) == doctest::Approx(0.25));
  }
  TEST_CASE("squared loss against direct summation") {
    auto ys = integer_range("Y", 4);
    HypothesisClass h(integer_range("T", 1), integer_range("X", 3), ys, {3, 0, 2});
    LearningSystem sys("sq", h, LossKind::squared);
    auto d = pairs({{0, 1}, {1, 2}, {2, 2}});
    // (1-3)^2 + (2-0)^2 + (2-2)^2 over 3
    const double oracle = (4.0 + 4.0 + 0.0) / 3.0;
    CHECK(empirical_risk(d, 0, sys) == doctest::Approx(oracle));
  }
  TEST_CASE("squared loss needs numbers") {
    HypothesisClass h(integer_range("T", 1), integer_range("X", 1), gen::symbols("Y", "y", 2), {0});
    CHECK(code_of([&] { LearningSystem("bad", h, LossKind::squared); }) == ErrorCode::NonNumericLabel);
  }
  TEST_CASE("empty data") {
    auto sys = constant_pair();
    CHECK(code_of([&] { (void)empirical_risk(Dataset{}, 0, sys); }) == ErrorCode::EmptyDataset);
  }
}

TEST_SUITE("run_algorithm") {
  TEST_CASE("risks 1/3 and 2/3") {
    auto sys = constant_pair();
    auto d = pairs({{0, 0}, {1, 0}, {2, 1}});
    CHECK(empirical_risk(d, 0, sys) == doctest::Approx(1.0 / 3.0));
    CHECK(empirical_risk(d, 1, sys) == doctest::Approx(2.0 / 3.0));
    CHECK(run_algorithm(d, sys) == 0);
  }
  TEST_CASE("ties go to the first parameter") {
    auto sys = constant_pair();
    CHECK(run_algorithm(pairs({{0, 0}, {1, 1}}), sys) == 0);
  }
  TEST_CASE("penalized ERM on empty data returns the anchor") {
    auto sys = constant_pair().with_algorithm(PenalizedErm{1, 0.1});
    CHECK(run_algorithm(Dataset{}, sys) == 1);
    CHECK(code_of([&] { (void)run_algorithm(Dataset{}, constant_pair()); }) == ErrorCode::EmptyDataset);
  }
  TEST_CASE("penalty trades risk against distance to the anchor") {
    auto sys = constant_pair();
    auto d = pairs({{0, 0}, {1, 0}, {2, 1}});
    // risk gap 1/3, distance 1: λ = 0.1 keeps θ1, λ = 0.5 moves to the anchor
    CHECK(run_algorithm(d, sys.with_algorithm(PenalizedErm{1, 0.1})) == 0);
    CHECK(run_algorithm(d, sys.with_algorithm(PenalizedErm{1, 0.5})) == 1);
    CHECK(goal_value(d, 0, sys.with_algorithm(PenalizedErm{1, 0.5})) == doctest::Approx(1.0 / 3.0 + 0.5));
  }

  TEST_CASE("argmin optimality, determinism and relabeling") {
    gen::Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
      const auto nx = gen::uniform(rng, 1, 6), ny = gen::uniform(rng, 1, 6), nt = gen::uniform(rng, 1, 6);
      auto h = gen::random_hypotheses(rng, nt, nx, ny);
      LearningSystem sys("r", h);
      auto d = gen::random_dataset(rng, nx, ny, gen::uniform(rng, 1, 8));
      const auto best = run_algorithm(d, sys);
      for (std::size_t t = 0; t < nt; ++t) CHECK(empirical_risk(d, best, sys) <= empirical_risk(d, t, sys));
      CHECK(run_algorithm(d, sys) == best);

      std::vector<std::size_t> perm(nt);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::size_t> table(nt * nx);
      for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t x = 0; x < nx; ++x) table[perm[t] * nx + x] = h.predict(t, x);
      LearningSystem permuted("p", HypothesisClass(h.theta(), h.inputs(), h.outputs(), table));
      const auto other = run_algorithm(d, permuted);
      // the new winner is the image of some minimizer of the original
      std::size_t original = nt;
      for (std::size_t t = 0; t < nt; ++t)
        if (perm[t] == other) original = t;
      CHECK(empirical_risk(d, original, sys) == empirical_risk(d, best, sys));
    }
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("table lookups") {
    auto sys = constant_pair();
    CHECK(evaluate(sys, 1, 2) == 1);
    CHECK(evaluate(sys, Atom("theta0"), Atom(1)) == Atom(0));
    CHECK(code_of([&] { (void)evaluate(sys, Atom("theta0"), Atom(7)); }) == ErrorCode::UnknownElement);
    CHECK(code_of([&] { (void)evaluate(sys, 0, 3); }) == ErrorCode::UnknownElement);
  }
  TEST_CASE("full sweep covers the table once") {
    gen::Rng rng(4);
    auto sys = LearningSystem("s", gen::random_hypotheses(rng, 4, 5, 3));
    std::size_t visited = 0;
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t x = 0; x < 5; ++x) {
        CHECK(evaluate(sys, t, x) == sys.hypotheses().table()[t * 5 + x]);
        ++visited;
      }
    CHECK(visited == sys.hypotheses().table().size());
  }
}

TEST_SUITE("generalization_error") {
  auto four = [] {
    HypothesisClass h(integer_range("T", 2), integer_range("X", 4), integer_range("Y", 2), {0, 1, 1, 0, 0, 1, 1, 1});
    return LearningSystem("four", h);
  };
  TEST_CASE("exact match") {
    CHECK(generalization_error(four(), 0, EvaluationContext::truth({0, 1, 1, 0})) == 0.0);
  }
  TEST_CASE("one of four") {
    CHECK(generalization_error(four(), 1, EvaluationContext::truth({0, 1, 1, 0})) == doctest::Approx(0.25));
  }
  TEST_CASE("nonuniform weight against a hand-enumerated sum") {
    EmpiricalMeasure w(integer_range("X", 4), {0.1, 0.2, 0.3, 0.4});
    // θ1 is wrong only at x = 3
    CHECK(generalization_error(four(), 1, EvaluationContext::truth({0, 1, 1, 0}), &w) == doctest::Approx(0.4));
    // truth all zeros: θ1 wrong at 1,2,3
    CHECK(generalization_error(four(), 1, EvaluationContext::truth({0, 0, 0, 0}), &w) ==
          doctest::Approx(0.2 + 0.3 + 0.4));
  }
  TEST_CASE("holdout mode") {
    auto ctx = EvaluationContext::holdout(pairs({{0, 0}, {3, 0}, {3, 1}}));
    CHECK(ctx.mode() == EvaluationMode::holdout);
    CHECK(generalization_error(four(), 1, ctx) == doctest::Approx(1.0 / 3.0));
  }
  TEST_CASE("truth must cover X") {
    CHECK(code_of([&] { (void)generalization_error(four(), 0, EvaluationContext::truth({0, 1})); }) ==
          ErrorCode::MissingTruth);
  }
  TEST_CASE("zero-one error lies in [0,1]") {
    gen::Rng rng(6);
    for (int rep = 0; rep < 200; ++rep) {
      const auto nx = gen::uniform(rng, 1, 6), ny = gen::uniform(rng, 1, 6), nt = gen::uniform(rng, 1, 6);
      LearningSystem sys("r", gen::random_hypotheses(rng, nt, nx, ny));
      const double e = generalization_error(sys, gen::uniform(rng, 0, nt - 1),
                                            EvaluationContext::truth(gen::random_function(rng, nx, ny)));
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
}

TEST_SUITE("verify_learning_axioms") {
  TEST_CASE("random exact-ERM systems pass") {
    gen::Rng rng(1234);
    for (int rep = 0; rep < 120; ++rep) {
      const auto nx = gen::uniform(rng, 1, 6), ny = gen::uniform(rng, 1, 6), nt = gen::uniform(rng, 1, 6);
      LearningSystem sys("r", gen::random_hypotheses(rng, nt, nx, ny));
      std::vector<Dataset> ds;
      const auto k = gen::uniform(rng, 1, 5);
      for (std::size_t i = 0; i < k; ++i) ds.push_back(gen::random_dataset(rng, nx, ny, gen::uniform(rng, 1, 6)));
      auto r = verify_learning_axioms(sys, ds);
      CHECK(r.pass());
    }
  }

  TEST_CASE("penalized ERM including empty data passes") {
    gen::Rng rng(55);
    for (int rep = 0; rep < 40; ++rep) {
      const auto nx = gen::uniform(rng, 1, 5), ny = gen::uniform(rng, 1, 4), nt = gen::uniform(rng, 1, 6);
      LearningSystem sys("r", gen::random_hypotheses(rng, nt, nx, ny), LossKind::zero_one,
                         PenalizedErm{gen::uniform(rng, 0, nt - 1), 0.1});
      std::vector<Dataset> ds{Dataset{}, gen::random_dataset(rng, nx, ny, 3)};
      CHECK(verify_learning_axioms(sys, ds).pass());
    }
  }

  TEST_CASE("hypothesis table corrupted after materialization") {
    auto sys = constant_pair();
    std::vector<Dataset> ds{pairs({{0, 0}, {1, 0}, {2, 1}})};
    auto ref = materialize(sys, ds);
    sys.hypotheses().set_prediction(0, 1, 1);
    auto r = verify_learning_axioms(sys, ds, ref);
    REQUIRE_FALSE(r.cascade.empty());
    CHECK(r.cascade[0].witness.size() == 3);
    CHECK(r.cascade[0].witness[0] == Atom("d0"));
    CHECK(r.cascade[0].witness[1] == Atom(1));
  }

  TEST_CASE("seeking by argmax") {
    auto sys = constant_pair();
    std::vector<Dataset> ds{pairs({{0, 0}, {1, 0}, {2, 1}})};
    auto ref = materialize(make_view(sys, ds), SeekRule::argmax);
    auto r = verify_learning_axioms(sys, ds, ref);
    CHECK_FALSE(r.goal_seeking.empty());
    CHECK(r.cascade.empty());
  }

  TEST_CASE("algorithm table that is not the minimizer") {
    auto sys = constant_pair();
    std::vector<Dataset> ds{pairs({{0, 0}, {1, 0}, {2, 1}})};
    auto ref = materialize(sys, ds);
    ref.algorithm = FiniteSystem(ref.algorithm.components(), {{0, 1}}, ref.algorithm.io());
    auto r = verify_learning_axioms(sys, ds, ref);
    CHECK_FALSE(r.erm.empty());
    CHECK_FALSE(r.pass());
  }

  TEST_CASE("value atoms round trip") {
    for (double v : {0.0, 1.0 / 3.0, 0.1 + 0.2, 1e-17, 2.5}) CHECK(value_of(value_atom(v)) == v);
  }
}
