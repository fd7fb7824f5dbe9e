#include <benchmark/benchmark.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "naive/dsl.hpp"
#include "naive/engine.hpp"
#include "naive/error.hpp"

namespace {

using namespace naive;

std::shared_ptr<const KnowledgeBase> weight_kb() {
  std::ifstream in(std::string(NAIVE_SOURCE_DIR) + "/kb/weight.nkb");
  std::stringstream ss;
  ss << in.rdbuf();
  auto r = parse_kb(ss.str());
  if (!r.ok()) throw Error("weight.nkb does not parse");
  return std::make_shared<const KnowledgeBase>(std::move(r.kb));
}

void seed(EvalContext& ctx, int days) {
  const Range& w = ctx.kb().at("ReportedWeight").range;
  const Range& fl = ctx.kb().at("FluidIn").range;
  const TimePoint t0 = TimePoint::parse("Day1T08:00");
  ctx.report_observation({"AdmissionWeight", t0, make_delta(70, w)});
  for (int d = 0; d < days; ++d) {
    const TimePoint t = t0 + Duration::days(d);
    if (d % 3 == 0) ctx.report_observation({"ReportedWeight", t, make_uniform(69 + 0.1 * d, 71 + 0.1 * d, w)});
    ctx.report_observation({"FluidIn", t, make_uniform(1.5, 2.5, fl)});
    ctx.report_observation({"FluidOut", t, make_uniform(1, 2, fl)});
  }
}

void BM_EvaluateCold(benchmark::State& state) {
  auto kb = weight_kb();
  EvalOptions off;
  off.caching = false;
  EvalContext ctx(kb, off);
  seed(ctx, static_cast<int>(state.range(0)));
  const TimePoint t = TimePoint::parse("Day1T20:00") + Duration::days(state.range(0) / 2);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.evaluate("CurrentWeight", t));
}
BENCHMARK(BM_EvaluateCold)->Arg(10)->Arg(100)->Arg(1000);

void BM_EvaluateCached(benchmark::State& state) {
  auto kb = weight_kb();
  EvalContext ctx(kb);
  seed(ctx, 100);
  const TimePoint t = TimePoint::parse("Day40T20:00");
  ctx.evaluate("CurrentWeight", t);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.evaluate("CurrentWeight", t));
}
BENCHMARK(BM_EvaluateCached);

void BM_ReportAndReevaluate(benchmark::State& state) {
  auto kb = weight_kb();
  EvalContext ctx(kb);
  seed(ctx, 30);
  const Range& w = kb->at("ReportedWeight").range;
  TimePoint t = TimePoint::parse("Day40T08:00");
  for (auto _ : state) {
    ctx.report_observation({"ReportedWeight", t, make_delta(72, w)});
    benchmark::DoNotOptimize(ctx.evaluate("CurrentWeight", t + Duration::hours(30)));
    t = t + Duration::days(1);
  }
}
BENCHMARK(BM_ReportAndReevaluate);

void BM_ParseKb(benchmark::State& state) {
  std::ifstream in(std::string(NAIVE_SOURCE_DIR) + "/kb/weight.nkb");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  for (auto _ : state) benchmark::DoNotOptimize(parse_kb(text));
}
BENCHMARK(BM_ParseKb);

}  // namespace
