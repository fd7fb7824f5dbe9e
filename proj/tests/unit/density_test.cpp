#include <gtest/gtest.h>

#include <random>

#include "naive/density.hpp"
#include "naive/error.hpp"
#include "oracle.hpp"

namespace naive {
namespace {

const Range kAge = Range::cardinal(0, 120, "years");
const Range kWeight = Range::cardinal(1, 300, "kg");
const Range kGlucose = Range::cardinal(60, 140, "mg/dl");
const Range kSex = Range::categorical({"female", "male"});
const Range kTrend = Range::ordinal({"decreasing", "stable", "increasing"});
const Range kClass = Range::ordinal({"hypo", "normo", "hyper"});

std::vector<PartitionEntry> glucose_partition() {
  return {{"hypo", EventSet::of_interval({60, 70, true, false})},
          {"normo", EventSet::of_interval(Interval::closed(70, 120))},
          {"hyper", EventSet::of_interval({120, 140, false, true})}};
}

TEST(RangeTest, InvariantsAreChecked) {
  EXPECT_FALSE(range_defect(kAge));
  EXPECT_TRUE(range_defect(Range::cardinal(5, 5)));
  EXPECT_TRUE(range_defect(Range::cardinal(0, INFINITY)));
  EXPECT_TRUE(range_defect(Range::categorical({})));
  EXPECT_TRUE(range_defect(Range::ordinal({"a", "a"})));
  EXPECT_THROW(require_valid(Range::cardinal(2, 1)), RangeError);
  EXPECT_EQ(kTrend.label_index("stable"), 1u);
  EXPECT_FALSE(kTrend.label_index("bogus"));
}

TEST(RangeTest, SameDomainIgnoresName) {
  EXPECT_TRUE(Range::cardinal(1, 300, "kg", "A").same_domain(Range::cardinal(1, 300, "kg")));
  EXPECT_FALSE(Range::cardinal(1, 300, "kg").same_domain(Range::cardinal(1, 300, "lb")));
  EXPECT_FALSE(kTrend.same_domain(Range::categorical(kTrend.labels)));
}

TEST(MakeUniformTest, HeightIsInverseWidth) {
  Density f = make_uniform(20, 30, kAge);
  ASSERT_EQ(f.cells().size(), 1u);
  EXPECT_DOUBLE_EQ(f.cells()[0].height, 0.1);
  EXPECT_DOUBLE_EQ(f.total_mass(), 1.0);
  EXPECT_FALSE(f.invariant_violation());
}

TEST(MakeUniformTest, FullRangePrior) {
  Density f = make_uniform(0, 120, kAge);
  EXPECT_DOUBLE_EQ(prob_in(f, EventSet::of_interval(Interval::closed(0, 120))), 1.0);
  EXPECT_DOUBLE_EQ(f.height_at(60), 1.0 / 120);
}

TEST(MakeUniformTest, RejectsEmptyAndOutOfRange) {
  EXPECT_THROW(make_uniform(5, 5, kAge), RangeError);
  EXPECT_THROW(make_uniform(-1, 5, kAge), RangeError);
  EXPECT_THROW(make_uniform(0, 1, kSex), RangeError);
}

TEST(MakeDeltaTest, AtomOfMassOne) {
  Density f = make_delta(70.0, kWeight);
  ASSERT_EQ(f.atoms().size(), 1u);
  EXPECT_EQ(f.atoms()[0], (Atom{70.0, 1.0}));
  EXPECT_TRUE(f.cells().empty());
  EXPECT_NO_THROW(make_delta(1.0, kWeight));
  EXPECT_THROW(make_delta(0.5, kWeight), RangeError);
}

TEST(MakePmfTest, NormalizesAndFillsMissingLabels) {
  std::vector<std::pair<std::string, double>> certain{{"female", 1}};
  Density s = make_pmf(certain, kSex);
  EXPECT_DOUBLE_EQ(s.probability("female"), 1.0);
  EXPECT_DOUBLE_EQ(s.probability("male"), 0.0);

  std::vector<std::pair<std::string, double>> w{{"decreasing", 1}, {"stable", 1}, {"increasing", 2}};
  Density t = make_pmf(w, kTrend);
  EXPECT_DOUBLE_EQ(t.pmf()[0], 0.25);
  EXPECT_DOUBLE_EQ(t.pmf()[1], 0.25);
  EXPECT_DOUBLE_EQ(t.pmf()[2], 0.5);
}

TEST(MakePmfTest, RejectsUnknownLabelAndZeroWeights) {
  std::vector<std::pair<std::string, double>> bogus{{"bogus", 1}};
  EXPECT_THROW(make_pmf(bogus, kSex), ArgumentError);
  std::vector<std::pair<std::string, double>> zero{{"male", 0}};
  EXPECT_THROW(make_pmf(zero, kSex), ArgumentError);
}

TEST(FromPartsTest, CanonicalizesAndNormalizes) {
  Density f = Density::from_parts(kAge, {{10, 1}, {5, 1}, {10, 2}},
                                  {{20, 30, 0.1}, {25, 35, 0.1}});
  ASSERT_EQ(f.atoms().size(), 2u);
  EXPECT_EQ(f.atoms()[0].x, 5);
  EXPECT_NEAR(f.total_mass(), 1.0, 1e-12);
  EXPECT_FALSE(f.invariant_violation());
  // The overlap [25, 30] carries both heights.
  EXPECT_NEAR(f.height_at(27) / f.height_at(22), 2.0, 1e-12);
  EXPECT_THROW(Density::from_parts(kAge, {{200, 1}}, {}), RangeError);
  EXPECT_THROW(Density::from_parts(kAge, {{10, -1}}, {}), ArgumentError);
  EXPECT_THROW(Density::from_parts(kAge, {}, {}), ArgumentError);
}

TEST(MergeCellsTest, SumsOverlapsAndJoinsEqualNeighbours) {
  auto cells = merge_cells({{0, 2, 1}, {1, 3, 1}, {3, 4, 1}});
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0], (Cell{0, 1, 1}));
  EXPECT_EQ(cells[1], (Cell{1, 2, 2}));
  EXPECT_EQ(cells[2], (Cell{2, 4, 1}));
}

TEST(ProbInTest, Examples) {
  EXPECT_DOUBLE_EQ(prob_in(make_uniform(20, 30, kAge),
                           EventSet::of_interval(Interval::closed(20, 30))),
                   1.0);
  Density g = make_uniform(60, 140, kGlucose);
  EXPECT_DOUBLE_EQ(prob_in(g, EventSet::of_interval(Interval::closed(70, 120))), 0.625);
  EXPECT_DOUBLE_EQ(prob_in(make_delta(70, kWeight),
                           EventSet::of_interval(Interval::closed(80, 90))),
                   0.0);
}

TEST(ProbInTest, AgreesWithQuadrature) {
  Density g = make_uniform(60, 140, kGlucose);
  const double q = testing::integrate([&](double x) { return g.pdf(x); }, 70, 120);
  EXPECT_NEAR(prob_in(g, EventSet::of_interval(Interval::closed(70, 120))), q, 1e-9);
}

TEST(ProbInTest, AtomEndpointsFollowClosedness) {
  Density d = make_delta(70, kWeight);
  EXPECT_EQ(prob_in(d, EventSet::of_interval({60, 70, true, false})), 0.0);
  EXPECT_EQ(prob_in(d, EventSet::of_interval({60, 70, true, true})), 1.0);
  EXPECT_EQ(prob_in(d, EventSet::of_interval({70, 80, false, true})), 0.0);
}

TEST(ProbInTest, IncompatibleKindsThrow) {
  EXPECT_THROW(prob_in(make_delta(70, kWeight), EventSet::of_labels({"male"})), RangeError);
  std::vector<std::pair<std::string, double>> w{{"male", 1}};
  EXPECT_THROW(prob_in(make_pmf(w, kSex), EventSet::of_interval(Interval::closed(0, 1))),
               RangeError);
}

TEST(ProbInTest, FullRangeAndFiniteAdditivity) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    Density f = testing::random_density(rng, kAge, 0, 120);
    EXPECT_NEAR(prob_in(f, EventSet::of_interval(Interval::closed(0, 120))), 1.0, 1e-9);
    std::uniform_real_distribution<double> u(0, 120);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double whole = prob_in(f, EventSet::of_interval(Interval::closed(0, b)));
    const double left = prob_in(f, EventSet::of_interval({0, a, true, false}));
    const double right = prob_in(f, EventSet::of_interval(Interval::closed(a, b)));
    EXPECT_NEAR(whole, left + right, 1e-12);
    const double both =
        prob_in(f, EventSet::of_intervals({{0, a, true, false}, Interval::closed(a, b)}));
    EXPECT_NEAR(both, whole, 1e-12);
  }
}

TEST(EventSetTest, RejectsOverlapButAllowsTouchingOpenEnds) {
  EXPECT_THROW(EventSet::of_intervals({Interval::closed(0, 2), Interval::closed(1, 3)}),
               ArgumentError);
  EXPECT_THROW(EventSet::of_intervals({Interval::closed(0, 1), Interval::closed(1, 3)}),
               ArgumentError);
  EXPECT_NO_THROW(EventSet::of_intervals({{0, 1, true, false}, Interval::closed(1, 3)}));
  EXPECT_THROW(EventSet::of_interval(Interval::closed(2, 1)), ArgumentError);
}

TEST(BayesFuseTest, ProductOfIndicatorsIsIntersection) {
  const Range r = Range::cardinal(0, 3);
  std::vector<Density> fs{make_uniform(0, 2, r), make_uniform(1, 3, r)};
  EXPECT_EQ(bayes_fuse(fs), make_uniform(1, 2, r));
}

TEST(BayesFuseTest, FullRangeUniformIsIdentity) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    Density f = testing::random_density(rng, kAge, 0, 120);
    std::vector<Density> fs{f, make_uniform(0, 120, kAge)};
    Density g = bayes_fuse(fs);
    ASSERT_EQ(g.cells().size(), f.cells().size());
    for (std::size_t i = 0; i < f.cells().size(); ++i) {
      EXPECT_NEAR(g.cells()[i].height, f.cells()[i].height, 1e-9);
      EXPECT_EQ(g.cells()[i].lo, f.cells()[i].lo);
    }
  }
}

TEST(BayesFuseTest, DisjointSupportsContradict) {
  const Range r = Range::cardinal(0, 3);
  std::vector<Density> fs{make_uniform(0, 1, r), make_uniform(2, 3, r)};
  EXPECT_THROW(bayes_fuse(fs), ContradictionError);
  std::vector<Density> one{make_uniform(0, 1, r)};
  EXPECT_THROW(bayes_fuse(one), ArgumentError);
}

TEST(BayesFuseTest, AtomsSurviveOnlyUnderPositiveCoDensity) {
  const Range r = Range::cardinal(0, 10);
  std::vector<Density> inside{make_delta(5, r), make_uniform(4, 6, r)};
  EXPECT_EQ(bayes_fuse(inside), make_delta(5, r));
  std::vector<Density> outside{make_delta(8, r), make_uniform(4, 6, r)};
  EXPECT_THROW(bayes_fuse(outside), ContradictionError);
  std::vector<Density> atoms{make_delta(5, r), make_delta(5, r)};
  EXPECT_EQ(bayes_fuse(atoms), make_delta(5, r));
}

TEST(BayesFuseTest, DiscreteProduct) {
  std::vector<std::pair<std::string, double>> a{{"hypo", 1}, {"normo", 1}};
  std::vector<std::pair<std::string, double>> b{{"normo", 1}, {"hyper", 1}};
  std::vector<Density> fs{make_pmf(a, kClass), make_pmf(b, kClass)};
  EXPECT_DOUBLE_EQ(bayes_fuse(fs).probability("normo"), 1.0);
}

TEST(BayesFuseTest, CommutativeAndAssociative) {
  std::mt19937_64 rng(5);
  const Range r = Range::cardinal(0, 10);
  for (int k = 0; k < 100; ++k) {
    // A shared wide cell keeps the product non-degenerate.
    auto make = [&] {
      Density d = testing::random_density(rng, r, 0, 10);
      std::vector<Density> pair{d, make_uniform(0, 10, r)};
      return mixture(std::vector<double>{0.5, 0.5}, pair);
    };
    Density a = make(), b = make(), c = make();
    std::vector<Density> ab{a, b}, ba{b, a};
    Density x = bayes_fuse(ab), y = bayes_fuse(ba);
    for (double t = 0; t <= 10; t += 0.37) EXPECT_NEAR(x.cdf(t), y.cdf(t), 1e-9);
    std::vector<Density> ab_c{x, c};
    std::vector<Density> bc{b, c};
    std::vector<Density> a_bc{a, bayes_fuse(bc)};
    std::vector<Density> abc{a, b, c};
    Density l = bayes_fuse(ab_c), m = bayes_fuse(a_bc), n = bayes_fuse(abc);
    for (double t = 0; t <= 10; t += 0.37) {
      EXPECT_NEAR(l.cdf(t), m.cdf(t), 1e-9);
      EXPECT_NEAR(l.cdf(t), n.cdf(t), 1e-9);
    }
  }
}

TEST(ThresholdMapTest, GlucoseClasses) {
  Density g = threshold_map(make_uniform(60, 140, kGlucose), glucose_partition(), kClass);
  EXPECT_NEAR(g.probability("hypo"), 0.125, 1e-15);
  EXPECT_NEAR(g.probability("normo"), 0.625, 1e-15);
  EXPECT_NEAR(g.probability("hyper"), 0.25, 1e-15);
  Density d = threshold_map(make_delta(100, kGlucose), glucose_partition(), kClass);
  EXPECT_EQ(d.probability("normo"), 1.0);
}

TEST(ThresholdMapTest, BoundaryAtomFollowsClosedEnd) {
  Density d = threshold_map(make_delta(70, kGlucose), glucose_partition(), kClass);
  EXPECT_EQ(d.probability("normo"), 1.0);
  Density e = threshold_map(make_delta(120, kGlucose), glucose_partition(), kClass);
  EXPECT_EQ(e.probability("normo"), 1.0);
}

TEST(ThresholdMapTest, RejectsBadPartitions) {
  auto missing = glucose_partition();
  missing[2].set = EventSet::of_interval({120, 130, false, true});
  EXPECT_TRUE(partition_defect(missing, kGlucose));
  EXPECT_THROW(threshold_map(make_uniform(60, 140, kGlucose), missing, kClass), ArgumentError);
  auto overlap = glucose_partition();
  overlap[1].set = EventSet::of_interval(Interval::closed(69, 120));
  EXPECT_TRUE(partition_defect(overlap, kGlucose));
  auto gap = glucose_partition();
  gap[0].set = EventSet::of_interval({60, 70, true, false});
  gap[1].set = EventSet::of_interval({70, 120, false, true});
  EXPECT_TRUE(partition_defect(gap, kGlucose));
  EXPECT_FALSE(partition_defect(glucose_partition(), kGlucose));
}

TEST(ThresholdMapTest, EachProbabilityEqualsProbIn) {
  std::mt19937_64 rng(3);
  auto part = glucose_partition();
  for (int k = 0; k < 200; ++k) {
    Density f = testing::random_density(rng, kGlucose, 60, 140);
    Density g = threshold_map(f, part, kClass);
    double total = 0;
    for (const auto& e : part) {
      EXPECT_EQ(g.probability(e.label), prob_in(f, e.set));
      total += g.probability(e.label);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(MixtureTest, Examples) {
  Density f = make_uniform(20, 30, kAge);
  std::vector<Density> one{f};
  EXPECT_EQ(mixture(std::vector<double>{1.0}, one), f);

  const Range r = Range::cardinal(0, 1);
  std::vector<Density> deltas{make_delta(0, r), make_delta(1, r)};
  Density m = mixture(std::vector<double>{0.5, 0.5}, deltas);
  ASSERT_EQ(m.atoms().size(), 2u);
  EXPECT_EQ(m.atoms()[0].mass, 0.5);
  EXPECT_EQ(m.atoms()[1].mass, 0.5);

  std::vector<Density> same{make_uniform(0, 1, r), make_uniform(0, 1, r)};
  EXPECT_EQ(mixture(std::vector<double>{0.25, 0.75}, same), make_uniform(0, 1, r));
}

TEST(MixtureTest, RejectsBadWeightsAndRanges) {
  const Range r = Range::cardinal(0, 1);
  std::vector<Density> two{make_uniform(0, 1, r), make_uniform(0, 1, r)};
  EXPECT_THROW(mixture(std::vector<double>{0.5, 0.6}, two), ArgumentError);
  EXPECT_THROW(mixture(std::vector<double>{1.0}, two), ArgumentError);
  std::vector<Density> mixed{make_uniform(0, 1, r), make_uniform(0, 1, kAge)};
  EXPECT_THROW(mixture(std::vector<double>{0.5, 0.5}, mixed), RangeError);
}

TEST(MomentsTest, UniformAndDelta) {
  auto m = moments(make_uniform(20, 30, kAge));
  EXPECT_DOUBLE_EQ(m.mean, 25);
  EXPECT_NEAR(m.variance, 100.0 / 12, 1e-12);
  EXPECT_EQ(quantile(make_delta(70, kWeight), 0.5), 70);
  EXPECT_THROW(quantile(make_delta(70, kWeight), 1.5), ArgumentError);
}

TEST(MomentsTest, MatchQuadrature) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    Density f = testing::random_density(rng, kAge, 0, 120);
    double mean = 0, second = 0;
    for (const auto& a : f.atoms()) {
      mean += a.x * a.mass;
      second += a.x * a.x * a.mass;
    }
    for (const auto& c : f.cells()) {
      mean += testing::integrate([&](double x) { return x * f.pdf(x); }, c.lo, c.hi, 2000);
      second += testing::integrate([&](double x) { return x * x * f.pdf(x); }, c.lo, c.hi, 2000);
    }
    auto m = moments(f);
    EXPECT_NEAR(m.mean, mean, 1e-3);
    EXPECT_NEAR(m.variance, second - mean * mean, 1e-1);
  }
}

TEST(QuantileTest, LeftContinuousInverse) {
  const Range r = Range::cardinal(0, 10);
  Density u = make_uniform(2, 4, r);
  EXPECT_DOUBLE_EQ(quantile(u, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(u, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(quantile(u, 1.0), 4.0);
  std::vector<Density> parts{make_delta(1, r), make_delta(5, r)};
  Density two = mixture(std::vector<double>{0.5, 0.5}, parts);
  EXPECT_EQ(quantile(two, 0.5), 1.0);
  EXPECT_EQ(quantile(two, 0.5000001), 5.0);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    Density f = testing::random_density(rng, r, 0, 10);
    for (double p : {0.05, 0.3, 0.5, 0.9}) {
      const double x = quantile(f, p);
      EXPECT_GE(f.cdf(x), p - 1e-12);
      EXPECT_LT(f.cdf(x - 1e-7), p + 1e-12);
    }
  }
}

TEST(GridPolicyTest, MinimumResolution) {
  EXPECT_NO_THROW(GridPolicy{}.validate());
  GridPolicy g;
  g.resolution = 7;
  EXPECT_THROW(g.validate(), ArgumentError);
}

TEST(DensityTest, PdfAndHeightDifferAtEdges) {
  const Range r = Range::cardinal(0, 10);
  Density f = Density::from_parts(r, {}, {{0, 1, 0.75}, {1, 2, 0.25}});
  EXPECT_EQ(f.pdf(1), 0.25);
  EXPECT_EQ(f.height_at(1), 0.75);
  EXPECT_EQ(f.pdf(0), 0.75);
  EXPECT_EQ(f.pdf(2), 0.25);
  EXPECT_EQ(f.height_at(2), 0.25);
  EXPECT_EQ(f.pdf(2.5), 0.0);
  EXPECT_EQ(f.height_at(2.5), 0.0);
  EXPECT_EQ(f.pdf(-1), 0.0);
}

}  // namespace
}  // namespace naive
