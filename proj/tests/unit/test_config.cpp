#include <doctest.h>

#include <cmath>

#include "testkit.hpp"
#include "varhist/config.hpp"
#include "varhist/errors.hpp"

using namespace testkit;

namespace {

double probability(const RunConfig& c, const std::string& id) {
  for (const auto& [g, p] : effectiveDistribution(c)) {
    if (g == id) return p;
  }
  return -1;
}

Errc codeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::MalformedRecord;
}

}  // namespace

TEST_CASE("preset distributions") {
  auto g = presetConfig("uniform-generators");
  CHECK(probability(g, "mutAdd") == doctest::Approx(0.196));
  CHECK(probability(g, "transplant") == doctest::Approx(0.196));
  CHECK(probability(g, "cloneVariant") == doctest::Approx(0.01));
  CHECK(probability(g, "cloneFeature") == doctest::Approx(0.01));

  auto o = presetConfig("uniform-operations");
  CHECK(probability(o, "transplant") == doctest::Approx(0.98 / 3));
  CHECK(probability(o, "removeFeature") == doctest::Approx(0.98 / 3));
  CHECK(probability(o, "mutDelete") == doctest::Approx(0.98 / 9));

  auto s = presetConfig("growing-system");
  CHECK(probability(s, "mutReplace") == doctest::Approx(0.2));
  CHECK(probability(s, "transplant") == doctest::Approx(0.29));
  CHECK(probability(s, "removeFeature") == doctest::Approx(0.09));

  for (const auto* name : {"uniform-generators", "uniform-operations", "growing-system"}) {
    double sum = 0;
    for (const auto& [id, p] : effectiveDistribution(presetConfig(name))) sum += p;
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(codeOf([] { presetConfig("nope"); }) == Errc::BadConfig);
}

TEST_CASE("defaults") {
  RunConfig c;
  CHECK(c.maxIterations == 200);
  CHECK(c.maxRetries == 50);
  CHECK(c.sensibilityDiscardProb == 0.5);
  CHECK(c.checker.kind == "bundled");
  // no distribution means uniform over the enabled generators
  c.generators = {"mutAdd", "mutDelete"};
  CHECK(probability(c, "mutAdd") == doctest::Approx(0.5));
}

TEST_CASE("config files overlay a base") {
  auto c = configFromJson(json::parse(R"({"preset": "growing-system", "seed": 9, "max_iterations": 30,
                                          "termination": "distinctFeatureCount >= 12",
                                          "checker": {"kind": "external", "cmd": "true", "timeout_s": 5}})"));
  CHECK(c.preset == "growing-system");
  CHECK(probability(c, "transplant") == doctest::Approx(0.29));
  CHECK(c.seed == 9);
  CHECK(c.maxIterations == 30);
  CHECK(c.termination->str() == "distinctFeatureCount >= 12");
  CHECK(c.checker.kind == "external");
  CHECK(c.checker.timeoutSeconds == 5);

  auto flat = configFromJson(json::parse(R"({"checker.kind": "external", "checker.cmd": "make"})"));
  CHECK(flat.checker.cmd == "make");

  auto back = configFromJson(toJson(c));
  CHECK(toJson(back) == toJson(c));

  CHECK(codeOf([] { configFromJson(json::parse(R"({"maxIterations": 3})")); }) == Errc::BadConfig);
  CHECK(codeOf([] { validateConfig(configFromJson(json::parse(R"({"checker": {"kind": "external"}})"))); }) ==
        Errc::BadConfig);
}

TEST_CASE("distribution validation") {
  RunConfig c;
  c.distribution = {{"mutAdd", 0.5}, {"mutDelete", 0.4}};
  CHECK(codeOf([&] { effectiveDistribution(c); }) == Errc::BadDistribution);
  c.distribution = {{"mutAdd", 0.5}, {"teleport", 0.5}};
  CHECK(codeOf([&] { effectiveDistribution(c); }) == Errc::BadDistribution);
  c.distribution = {{"mutAdd", 1.5}, {"mutDelete", -0.5}};
  CHECK(codeOf([&] { effectiveDistribution(c); }) == Errc::BadDistribution);
  c.distribution = {{"mutAdd", 1.0}};
  CHECK(probability(c, "mutAdd") == doctest::Approx(1.0));
}

TEST_CASE("termination conditions") {
  auto t = Termination::parse("  totalLoc   < 100 ");
  CHECK(t.metric == "totalLoc");
  CHECK(t.op == "<");
  CHECK(t.value == 100);
  MetricRow m;
  m.totalLoc = 99;
  CHECK(t.holds(m));
  m.totalLoc = 100;
  CHECK_FALSE(t.holds(m));
  CHECK(Termination::parse("repositoryCount>=3").op == ">=");
  CHECK(codeOf([] { Termination::parse("bogus >= 1"); }) == Errc::BadConfig);
  CHECK(codeOf([] { Termination::parse("totalLoc >= many"); }) == Errc::BadConfig);
  CHECK(codeOf([] { Termination::parse("totalLoc"); }) == Errc::BadConfig);
}

TEST_CASE("rng streams") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ULL);

  auto a = Rng::forIteration(7, 3);
  auto b = Rng::forIteration(7, 3);
  auto c = Rng::forIteration(7, 4);
  auto d = Rng::forIteration(8, 3);
  auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  CHECK(x != d.next());

  Rng r(1);
  std::vector<int> hist(3);
  for (int i = 0; i < 30000; ++i) ++hist[r.below(3)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    auto u = r.unit();
    CHECK((u >= 0.0 && u < 1.0));
  }
  CHECK_THROWS(r.below(0));
}

TEST_CASE("generator selection follows the cumulative distribution") {
  std::vector<std::pair<std::string, double>> dist = {{"a", 0.0}, {"b", 1.0}};
  Rng r(5);
  for (int i = 0; i < 100; ++i) CHECK(selectGenerator(dist, r) == "b");
  dist = {{"a", 0.25}, {"b", 0.75}};
  int as = 0;
  for (int i = 0; i < 40000; ++i) as += selectGenerator(dist, r) == "a";
  CHECK(std::abs(as - 10000) < 400);
}
