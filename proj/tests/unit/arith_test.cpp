#include <gtest/gtest.h>

#include <random>

#include "naive/density.hpp"
#include "naive/error.hpp"
#include "oracle.hpp"

namespace naive {
namespace {

const Range kWide = Range::cardinal(-100, 100);

TEST(CombineArithTest, AtomShift) {
  const Range w = Range::cardinal(-300, 300, "kg");
  auto r = combine_arith(ArithOp::add, make_delta(70, w), make_delta(-2, w), w);
  EXPECT_EQ(r.density, make_delta(68, w));
  EXPECT_EQ(r.clamped_mass, 0.0);
}

TEST(CombineArithTest, TriangularSumOfUniforms) {
  const Range u = Range::cardinal(0, 1), out = Range::cardinal(0, 2);
  auto r = combine_arith(ArithOp::add, make_uniform(0, 1, u), make_uniform(0, 1, u), out);
  const Density& d = r.density;
  EXPECT_NEAR(d.pdf(1.0), 1.0, 2.0 / 512 * 2);
  EXPECT_NEAR(d.pdf(0.5), 0.5, 1e-2);
  EXPECT_NEAR(d.total_mass(), 1.0, 1e-9);
  auto m = moments(d);
  EXPECT_NEAR(m.mean, 1.0, 1e-9);
  EXPECT_NEAR(m.variance, 1.0 / 6, 1e-4);
}

TEST(CombineArithTest, IntakeSupportAndSymmetry) {
  const Range litres = Range::cardinal(0, 10, "L");
  auto r = combine_arith(ArithOp::add, make_uniform(0.5, 1.5, litres),
                         make_uniform(1, 2, litres), litres);
  auto [lo, hi] = r.density.support();
  EXPECT_NEAR(lo, 1.5, 2.0 / 512);
  EXPECT_NEAR(hi, 3.5, 2.0 / 512);
  EXPECT_NEAR(moments(r.density).mean, 2.5, 1e-9);
  for (double x = 0.05; x < 1.0; x += 0.1)
    EXPECT_NEAR(r.density.cdf(2.5 - x), 1.0 - r.density.cdf(2.5 + x), 1e-9);
  std::mt19937_64 rng(1);
  auto s = testing::sample_op(ArithOp::add, make_uniform(0.5, 1.5, litres),
                              make_uniform(1, 2, litres), 200000, rng);
  EXPECT_LT(testing::ks_distance(r.density, s), 0.01);
}

TEST(CombineArithTest, IdentityElements) {
  std::mt19937_64 rng(21);
  const Range one = Range::cardinal(-100, 100);
  for (int k = 0; k < 50; ++k) {
    Density f = testing::random_density(rng, kWide, -10, 10);
    Density plus = combine_arith(ArithOp::add, f, make_delta(0, one), kWide).density;
    Density times = combine_arith(ArithOp::mul, f, make_delta(1, one), kWide).density;
    for (double x = -10; x <= 10; x += 0.25) {
      EXPECT_NEAR(plus.cdf(x), f.cdf(x), 1e-12);
      EXPECT_NEAR(times.cdf(x), f.cdf(x), 1e-12);
    }
  }
}

TEST(CombineArithTest, MulByZeroAtomGivesAtomAtZero) {
  auto r = combine_arith(ArithOp::mul, make_uniform(1, 2, kWide), make_delta(0, kWide), kWide);
  EXPECT_EQ(r.density, make_delta(0, kWide));
}

TEST(CombineArithTest, ClampsToBoundaryAtoms) {
  const Range narrow = Range::cardinal(0, 1);
  auto r = combine_arith(ArithOp::add, make_uniform(0, 1, narrow), make_delta(0.5, narrow),
                         narrow);
  EXPECT_NEAR(r.clamped_mass, 0.5, 1e-12);
  EXPECT_NEAR(r.density.atom_mass_at(1.0), 0.5, 1e-12);
  EXPECT_NEAR(r.density.total_mass(), 1.0, 1e-12);
  EXPECT_FALSE(r.density.invariant_violation());
}

TEST(CombineArithTest, EntirelyOutsideRangeThrows) {
  const Range narrow = Range::cardinal(0, 1);
  EXPECT_THROW(combine_arith(ArithOp::add, make_delta(5, kWide), make_delta(5, kWide), narrow),
               RangeError);
}

TEST(CombineArithTest, DivisionGuardsZero) {
  Density f = make_uniform(1, 2, kWide);
  EXPECT_THROW(combine_arith(ArithOp::div, f, make_uniform(-1, 1, kWide), kWide),
               SingularityError);
  EXPECT_THROW(combine_arith(ArithOp::div, f, make_delta(0, kWide), kWide), SingularityError);
  // The guard half-width is span * 1e-6 = 2e-4 here.
  EXPECT_THROW(combine_arith(ArithOp::div, f, make_uniform(1e-4, 1, kWide), kWide),
               SingularityError);
  EXPECT_NO_THROW(combine_arith(ArithOp::div, f, make_uniform(1e-3, 1, kWide), kWide));
}

TEST(CombineArithTest, DivisionByAtomIsExactScale) {
  auto r = combine_arith(ArithOp::div, make_uniform(2, 4, kWide), make_delta(2, kWide), kWide);
  EXPECT_EQ(r.density, make_uniform(1, 2, kWide));
}

TEST(CombineArithTest, RejectsDiscreteOperands) {
  const Range cls = Range::ordinal({"a", "b"});
  std::vector<std::pair<std::string, double>> w{{"a", 1}};
  EXPECT_THROW(combine_arith(ArithOp::add, make_pmf(w, cls), make_delta(0, kWide), kWide),
               RangeError);
}

TEST(CombineArithTest, NonUniformGridResolution) {
  const Range u = Range::cardinal(0, 1), out = Range::cardinal(0, 2);
  GridPolicy g;
  g.resolution = 8;
  auto r = combine_arith(ArithOp::add, make_uniform(0, 1, u), make_uniform(0, 1, u), out, g);
  EXPECT_LE(r.density.cells().size(), 8u);
  EXPECT_NEAR(r.density.total_mass(), 1.0, 1e-9);
}

class MonteCarloTest : public ::testing::TestWithParam<ArithOp> {};

TEST_P(MonteCarloTest, RandomPairsMatchSampling) {
  const ArithOp op = GetParam();
  std::mt19937_64 rng(100 + static_cast<int>(op));
  for (int k = 0; k < 10; ++k) {
    Density f = testing::random_density(rng, kWide, -5, 5);
    Density g = op == ArithOp::div ? testing::random_density(rng, kWide, 0.5, 5)
                                   : testing::random_density(rng, kWide, -5, 5);
    auto r = combine_arith(op, f, g, kWide);
    EXPECT_EQ(r.clamped_mass, 0.0);
    EXPECT_FALSE(r.density.invariant_violation(1e-6));
    auto s = testing::sample_op(op, f, g, 100000, rng);
    EXPECT_LT(testing::ks_distance(r.density, s), 0.015) << "pair " << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Ops, MonteCarloTest,
                         ::testing::Values(ArithOp::add, ArithOp::sub, ArithOp::mul,
                                           ArithOp::div));

TEST(ArithOpTest, Names) {
  for (auto op : {ArithOp::add, ArithOp::sub, ArithOp::mul, ArithOp::div})
    EXPECT_EQ(parse_arith_op(to_string(op)), op);
  EXPECT_FALSE(parse_arith_op("pow"));
}

}  // namespace
}  // namespace naive
