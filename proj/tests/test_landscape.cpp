#include <doctest.h>

#include <random>
#include <regex>

#include <omp.h>

#include "oracles.hpp"
#include "tunescape/errors.hpp"
#include "tunescape/landscape.hpp"
#include "tunescape/serial.hpp"

using namespace tunescape;

namespace {

struct Chain {
  SearchSpaceSpec space;
  TuningCache cache;
  explicit Chain(const std::vector<double>& times)
      : space(parse_space_spec("kernel = \"chain\"\nneighbor_scheme = adjacent\n[params]\nv = [0.." +
                               std::to_string(times.size() - 1) + "]\n")),
        cache(TuningCache::for_space(space, "dev")) {
    for (std::size_t i = 0; i < times.size(); ++i)
      cache.insert(Observation::success(std::to_string(i), {times[i]}, times[i]));
  }
};

std::vector<std::pair<std::size_t, std::size_t>> edges_of(const Digraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < g.size(); ++u)
    for (const auto v : g.successors(static_cast<Digraph::Node>(u))) out.emplace_back(u, v);
  return out;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (const double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("perf_stats examples") {
  const auto s = perf_stats(oracle::perf_cache({1, 2, 100}));
  CHECK(s.median_perf == 2);
  CHECK(s.max_perf == 100);
  CHECK(s.impact == 50.0);
  CHECK(perf_stats(oracle::perf_cache({1, 2, 3, 10})).median_perf == 2.5);
  CHECK_THROWS_AS(perf_stats(TuningCache{}), NoFeasibleData);
  auto failed = oracle::perf_cache({});
  failed.insert(Observation::failure("0", Status::runtime_failed));
  try {
    (void)perf_stats(failed);
    FAIL("expected NoFeasibleData");
  } catch (const NoFeasibleData& e) {
    CHECK(std::string(e.what()).find("NoFeasibleData") != std::string::npos);
  }
  auto mixed = oracle::perf_cache({4, 8});
  mixed.insert(Observation::failure("9", Status::invalid));
  const auto m = perf_stats(mixed);
  CHECK(m.n_ok == 2);
  CHECK(m.n_failed == 1);
  CHECK(m.median_perf == 6);
  CHECK(m.min_time_ms == 0.125);
}

TEST_CASE("quantiles interpolate between ranks") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile(v, 0.0) == 1);
  CHECK(quantile(v, 1.0) == 5);
  CHECK(quantile(v, 0.5) == 3);
  CHECK(quantile(v, 0.25) == 2);
  CHECK(quantile(v, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("build_ffg chain example") {
  const Chain chain({3, 2, 5, 1, 4});
  const auto ffg = build_ffg(chain.cache, chain.space, NeighborScheme::adjacent);
  CHECK(edges_of(ffg.graph()) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 1}, {2, 3}, {4, 3}});
  CHECK(find_local_minima(ffg) == std::vector<std::size_t>{1, 3});
  CHECK(ffg.f_opt() == 1);
  CHECK(ffg.graph().is_acyclic());

  const auto ser = serial::build_ffg(chain.cache, chain.space, NeighborScheme::adjacent);
  CHECK(edges_of(ser.graph()) == edges_of(ffg.graph()));

  const std::string dot = export_dot(ffg);
  CHECK(dot.rfind("digraph ffg {", 0) == 0);
  const std::regex edge_re(R"(n\d+ -> n\d+;)");
  CHECK(std::distance(std::sregex_iterator(dot.begin(), dot.end(), edge_re), std::sregex_iterator()) == 4);
}

TEST_CASE("build_ffg other examples") {
  const Chain all_pairs({3, 2, 5, 1, 4});
  const auto h = build_ffg(all_pairs.cache, all_pairs.space, NeighborScheme::hamming1);
  CHECK(find_local_minima(h) == std::vector<std::size_t>{3});

  const Chain mono({5, 4, 3, 2, 1});
  const auto m = build_ffg(mono.cache, mono.space, NeighborScheme::adjacent);
  CHECK(m.graph().edge_count() == 4);
  CHECK(find_local_minima(m) == std::vector<std::size_t>{4});

  const Chain single({7});
  const auto s = build_ffg(single.cache, single.space, NeighborScheme::adjacent);
  CHECK(find_local_minima(s) == std::vector<std::size_t>{0});
  const std::string dot = export_dot(s);
  CHECK(dot.find("n0 [label=\"0\"") != std::string::npos);
  CHECK(dot.find("->") == std::string::npos);

  const Chain ties({2, 2, 1});
  const auto t = build_ffg(ties.cache, ties.space, NeighborScheme::adjacent);
  CHECK(edges_of(t.graph()) == std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}});
  CHECK(find_local_minima(t) == std::vector<std::size_t>{0, 2});

  auto holes = Chain({3, 2, 5}).cache;
  holes.records.erase("1");
  CHECK_THROWS_AS(build_ffg(holes, Chain({3, 2, 5}).space, NeighborScheme::adjacent), IncompleteCache);

  auto failed = Chain({3, 2, 5});
  failed.cache.insert(Observation::failure("1", Status::runtime_failed));
  const auto f = build_ffg(failed.cache, failed.space, NeighborScheme::adjacent);
  CHECK(f.size() == 2);
  CHECK(f.graph().edge_count() == 0);
}

TEST_CASE("pagerank examples") {
  const auto empty5 = Digraph::from_edges(5, {});
  for (const double s : pagerank(empty5)) CHECK(s == doctest::Approx(0.2).epsilon(1e-10));

  const auto ab = pagerank(Digraph::from_edges(2, {{0, 1}}));
  CHECK(ab[0] == doctest::Approx(0.3509).epsilon(1e-3));
  CHECK(ab[1] == doctest::Approx(0.6491).epsilon(1e-3));
  // a = 0.075 + 0.425 b and b = 0.075 + 0.425 b + 0.85 a
  const double b = 0.13875 / 0.21375;
  CHECK(std::abs(ab[1] - b) < 1e-7);
  CHECK(std::abs(ab[0] - (1 - b)) < 1e-7);

  CHECK_THROWS_AS(pagerank(Digraph{}), std::invalid_argument);
  PageRankOptions tight;
  tight.max_iterations = 2;
  tight.tolerance = 1e-30;
  CHECK_THROWS_AS(pagerank(Digraph::from_edges(3, {{0, 1}, {1, 2}}), tight), NotConverged);
  CHECK_THROWS_AS(Digraph::from_edges(2, {{1, 1}}), std::invalid_argument);
}

TEST_CASE("proportion of centrality examples") {
  const Chain chain({3, 2, 5, 1, 4});
  const auto ffg = build_ffg(chain.cache, chain.space, NeighborScheme::adjacent);
  const auto scores = pagerank(ffg);
  const auto dense = oracle::dense_pagerank(5, {{0, 1}, {2, 1}, {2, 3}, {4, 3}});
  const double c0 = dense[3] / (dense[1] + dense[3]);
  CHECK(std::abs(proportion_of_centrality(ffg, scores, 0.0) - c0) < 1e-9);
  CHECK(proportion_of_centrality(ffg, scores, 1.0) == 1.0);
  CHECK(proportion_of_centrality(ffg, scores, 0.99) == doctest::Approx(c0));

  const auto curve = centrality_curve(ffg);
  CHECK(curve.p_grid.size() == 31);
  CHECK(curve.p_grid.front() == 0.0);
  CHECK(curve.p_grid.back() == doctest::Approx(0.15));
  CHECK(std::abs(curve.c_p_values.front() - c0) < 1e-9);
  CHECK(curve.minima_count == 2);
  CHECK(curve.damping == 0.85);

  const Chain mono({5, 4, 3, 2, 1});
  const auto unimodal = centrality_curve(build_ffg(mono.cache, mono.space, NeighborScheme::adjacent));
  for (const double c : unimodal.c_p_values) CHECK(c == 1.0);

  const std::string csv = centrality_csv(curve);
  CHECK(csv.rfind("p,c_p\n0,", 0) == 0);
}

TEST_CASE("property: FFG and centrality against dense oracles") {
  std::mt19937_64 rng(123);
  int checked = 0;
  while (checked < 30) {
    const auto rs = oracle::random_space(rng, 2000);
    const auto space = parse_space_spec(rs.spec_text());
    const auto valid = rs.valid_indices();
    if (valid.empty() || valid.size() > 500) continue;
    std::map<std::string, double> times;
    std::uniform_int_distribution<int> t(1, 40);
    for (const auto& idx : valid)
      if (rng() % 10) times[rs.key(idx)] = t(rng) * 0.5;  // coarse grid, so ties occur
    if (times.empty()) continue;
    auto cache = oracle::make_cache(space, times);
    for (const auto& idx : valid)
      if (!times.count(rs.key(idx))) cache.insert(Observation::failure(rs.key(idx), Status::runtime_failed));

    for (const auto scheme : {NeighborScheme::hamming1, NeighborScheme::adjacent}) {
      const oracle::LandscapeOracle want(rs, times, scheme);
      const auto ffg = build_ffg(cache, space, scheme);
      CHECK(ffg.keys() == want.keys);
      CHECK(find_local_minima(ffg) == want.minima);
      CHECK(ffg.graph().is_acyclic());
      auto e = edges_of(ffg.graph());
      auto we = want.edges;
      std::sort(we.begin(), we.end());
      CHECK(e == we);
      CHECK(edges_of(serial::build_ffg(cache, space, scheme).graph()) == e);

      // The default stopping rule (L1 step < 1e-8) leaves an L1 error up to 1e-8 * d / (1 - d),
      // so the 1e-9 comparison runs at a tighter tolerance; the default run is held to that bound.
      const auto scores = pagerank(ffg, {.tolerance = 1e-13});
      const auto dense = oracle::dense_pagerank(want.keys.size(), want.edges);
      CHECK(std::abs(sum(scores) - 1.0) < 1e-8);
      const auto loose = pagerank(ffg);
      double l1 = 0;
      for (std::size_t i = 0; i < loose.size(); ++i) l1 += std::abs(loose[i] - dense[i]);
      CHECK(l1 <= 1e-8 * 0.85 / 0.15);
      const auto ref = serial::pagerank(ffg.graph(), {.tolerance = 1e-13});
      for (std::size_t i = 0; i < scores.size(); ++i) CHECK(std::abs(scores[i] - ref[i]) < 1e-12);
      double prev = 0;
      for (const double p : {0.0, 0.05, 0.10, 0.15}) {
        const double c = proportion_of_centrality(ffg, scores, p);
        CHECK(std::abs(c - want.c_p(dense, p)) < 1e-9);
        CHECK(c >= prev);
        prev = c;
      }
    }
    ++checked;
  }
}

TEST_CASE("pagerank is independent of thread count") {
  std::mt19937_64 rng(8);
  std::vector<std::pair<Digraph::Node, Digraph::Node>> edges;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < 80000; ++i) {
    const auto u = static_cast<Digraph::Node>(rng() % n), v = static_cast<Digraph::Node>(rng() % n);
    if (u < v) edges.emplace_back(u, v);
  }
  const auto g = Digraph::from_edges(n, edges);
  omp_set_num_threads(1);
  const auto one = pagerank(g);
  omp_set_num_threads(4);
  const auto four = pagerank(g);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(one == four);
}

TEST_CASE("application efficiency and portability examples") {
  CacheSet caches;
  caches["d1"] = oracle::perf_cache({50, 100, 10}, "d1");
  caches["d2"] = oracle::perf_cache({100, 80, 20}, "d2");
  caches["d2"].insert(Observation::failure("3", Status::compile_failed));
  caches["d1"].insert(Observation::success("3", {1.0}, 1.0, 5.0));

  CHECK(app_efficiency(caches["d1"], "0") == 0.5);
  CHECK(app_efficiency(caches["d1"], "1") == 1.0);
  CHECK(app_efficiency(caches["d2"], "3") == 0.0);
  CHECK(app_efficiency(caches["d2"], "7") == 0.0);

  CHECK(harmonic_portability(std::vector<double>{1.0, 1.0}) == 1.0);
  CHECK(harmonic_portability(std::vector<double>{0.5, 1.0}) == doctest::Approx(2.0 / 3.0));
  CHECK(harmonic_portability(std::vector<double>{0.0, 0.9}) == 0.0);

  const std::vector<std::string> both{"d1", "d2"};
  const auto r = perf_portability(caches, both, "0");
  CHECK(r.efficiencies == std::vector<double>{0.5, 1.0});
  CHECK(r.pp == doctest::Approx(2.0 / 3.0));
  CHECK(perf_portability(caches, both, "3").pp == 0.0);
  const std::vector<std::string> unknown{"d1", "zz"};
  CHECK_THROWS_AS(perf_portability(caches, unknown, "0"), UnknownDevice);
  CHECK_THROWS_AS(perf_portability(caches, std::vector<std::string>{}, "0"), std::invalid_argument);

  const auto best = best_portable_config(caches, both);
  REQUIRE(best.has_value());
  // key 1: e = {1.0, 0.8}, pp = 0.888..; key 0: {0.5, 1.0}, pp = 0.666..
  CHECK(best->config == "1");
  CHECK(serial::best_portable_config(caches, both)->config == "1");

  const std::vector<std::string> only1{"d1"};
  const auto single = best_portable_config(caches, only1);
  CHECK(single->config == "1");
  CHECK(single->pp == 1.0);

  CacheSet twins{{"a", oracle::perf_cache({3, 9, 9, 1}, "a")}, {"b", oracle::perf_cache({3, 9, 9, 1}, "b")}};
  const std::vector<std::string> ab{"a", "b"};
  CHECK(best_portable_config(twins, ab)->config == "1");  // tie with key 2 goes to canonical order

  CacheSet disjoint{{"a", oracle::perf_cache({1, 2}, "a")}, {"b", oracle::perf_cache({1, 2}, "b")}};
  disjoint["a"].insert(Observation::failure("0", Status::invalid));
  disjoint["b"].insert(Observation::failure("1", Status::invalid));
  CHECK_FALSE(best_portable_config(disjoint, ab).has_value());

  const std::string json = portability_json(r);
  CHECK(json.find("\"devices\"") != std::string::npos);
  CHECK(json.find("\"pp\"") != std::string::npos);
}

TEST_CASE("property: portability identities and argmax optimality") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> e(1 + rng() % 6);
    for (auto& x : e) x = rng() % 10 ? u(rng) : 0.0;
    const double pp = harmonic_portability(e);
    const double lo = *std::min_element(e.begin(), e.end());
    const double hi = *std::max_element(e.begin(), e.end());
    if (lo == 0) {
      CHECK(pp == 0);
      continue;
    }
    CHECK(lo <= pp);
    CHECK(pp <= hi);
    CHECK(pp <= arithmetic_mean(e));
  }
  for (int trial = 0; trial < 20; ++trial) {
    CacheSet caches;
    std::vector<std::string> devices;
    for (int d = 0; d < 4; ++d) {
      std::vector<double> perf(30);
      for (auto& p : perf) p = 1 + u(rng) * 100;
      devices.push_back("d" + std::to_string(d));
      caches[devices.back()] = oracle::perf_cache(perf, devices.back());
    }
    const auto b = best_portable_config(caches, devices);
    for (const auto& [key, obs] : caches.begin()->second.records)
      CHECK(perf_portability(caches, devices, key).pp <= b->pp);
    CHECK(b->config == serial::best_portable_config(caches, devices)->config);
    CHECK(b->pp == serial::best_portable_config(caches, devices)->pp);
  }
}

TEST_CASE("top_k examples") {
  const auto cache = oracle::perf_cache({5, 9, 1, 9, 7});
  const auto top = top_k(cache, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].config == "1");
  CHECK(top[1].config == "3");
  CHECK(top[2].config == "4");
  CHECK(top_k(cache, 50).size() == 5);
  CHECK_THROWS_AS(top_k(cache, 0), std::invalid_argument);
}

TEST_CASE("distribution export examples") {
  const auto data = export_distribution(oracle::perf_cache({1, 2, 100}));
  REQUIRE(data.rows.size() == 3);
  CHECK(data.rows[0].fraction_of_optimum == 0.01);
  CHECK(data.rows[1].fraction_of_optimum == 0.02);
  CHECK(data.rows[2].fraction_of_optimum == 1.0);
  const std::string csv = distribution_csv(data);
  CHECK(csv.rfind("config_key,metric_value,fraction_of_optimum\n\"0\",1,0.01\n", 0) == 0);

  const auto single = export_distribution(oracle::perf_cache({42}));
  for (const double q : single.quantiles) CHECK(q == 1.0);
  CHECK_THROWS_AS(export_distribution(TuningCache{}), NoFeasibleData);

  // A 1085 median against a 1154 optimum is the 94% figure.
  const auto d = export_distribution(oracle::perf_cache({1000, 1085, 1154}));
  CHECK(d.quantiles[3] == doctest::Approx(0.94).epsilon(0.005));
}

TEST_CASE("scaling all metrics leaves the analysis unchanged") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::vector<double> base(40);
  for (auto& p : base) p = u(rng);
  for (const double k : {0.5, 3.0, 1000.0}) {
    std::vector<double> scaled(base);
    for (auto& p : scaled) p *= k;
    const auto a = perf_stats(oracle::perf_cache(base));
    const auto b = perf_stats(oracle::perf_cache(scaled));
    CHECK(std::abs(a.impact - b.impact) <= 1e-12 * a.impact);
    CHECK(top_k(oracle::perf_cache(base), 1)[0].config == top_k(oracle::perf_cache(scaled), 1)[0].config);
  }
}

TEST_CASE("adding a device can raise the best portability") {
  // Config 0 reaches 90% on a and b and is optimal on c; configs 1 and 2 each suit one device.
  CacheSet caches;
  caches["a"] = oracle::perf_cache({9, 10, 1}, "a");
  caches["b"] = oracle::perf_cache({9, 1, 10}, "b");
  caches["c"] = oracle::perf_cache({10, 1, 1}, "c");
  const std::vector<std::string> two{"a", "b"}, three{"a", "b", "c"};
  const auto pair = best_portable_config(caches, two);
  const auto triple = best_portable_config(caches, three);
  CHECK(pair->config == "0");
  CHECK(pair->pp == doctest::Approx(0.9));
  CHECK(triple->pp == doctest::Approx(3 / (2 / 0.9 + 1)));
  CHECK(triple->pp > pair->pp);
}
