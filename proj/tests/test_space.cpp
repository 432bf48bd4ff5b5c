#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tunescape/errors.hpp"
#include "tunescape/expression.hpp"
#include "tunescape/serial.hpp"
#include "tunescape/space.hpp"

using namespace tunescape;

namespace {

SearchSpaceSpec xy_space() {
  return parse_space_spec("kernel = \"xy\"\n[params]\nx = [1, 2]\ny = [1, 2]\n[constraints]\nx <= y\n");
}

std::vector<std::string> keys_of(const SearchSpaceSpec& s, const std::vector<Configuration>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(s.key(c));
  return out;
}

bool eval_on(const std::string& expr, std::vector<Symbol> syms, std::vector<EvalValue> vals) {
  return Expression::parse(expr, syms).test(vals);
}

}  // namespace

TEST_CASE("constraint evaluation") {
  const std::vector<Symbol> xy{{"block_size_x", ExprType::integer}, {"block_size_y", ExprType::integer}};
  CHECK(eval_on("block_size_x * block_size_y <= 1024", xy, {std::int64_t{32}, std::int64_t{16}}));

  const std::vector<Symbol> tl{{"temporal_tiling_factor", ExprType::integer},
                               {"loop_unroll_factor_t", ExprType::integer}};
  CHECK_FALSE(eval_on("temporal_tiling_factor % loop_unroll_factor_t == 0", tl, {std::int64_t{5}, std::int64_t{2}}));

  const std::vector<Symbol> sp{{"use_shmem", ExprType::integer}, {"use_padding", ExprType::integer}};
  CHECK(eval_on("use_shmem == 1 || use_padding == 0", sp, {std::int64_t{0}, std::int64_t{0}}));
}

TEST_CASE("expression semantics") {
  const std::vector<Symbol> s{{"a", ExprType::integer}, {"b", ExprType::integer}, {"m", ExprType::string}};
  auto eval = [&](const std::string& e, std::int64_t a, std::int64_t b) {
    return Expression::parse(e, s).evaluate(std::vector<EvalValue>{a, b, std::string("x")});
  };
  CHECK(std::get<std::int64_t>(eval("a / b", -7, 2)) == -3);
  CHECK(std::get<std::int64_t>(eval("a ^ b", 2, 10)) == 1024);
  CHECK(std::get<std::int64_t>(eval("-a + b * 2", 3, 4)) == 5);
  CHECK(std::get<bool>(eval("!(a < b) && m == \"x\"", 5, 4)));
  // short-circuit: the right side would divide by zero
  CHECK(std::get<bool>(eval("b == 0 || a / b > 0", 1, 0)));
  CHECK_THROWS_AS(eval("a % b == 0", 1, 0), EvaluationError);
  CHECK_THROWS_AS(eval("a * b", INT64_MAX, 2), EvaluationError);
  CHECK_THROWS_AS(Expression::parse("m < \"y\"", s), SpecError);
  CHECK_THROWS_AS(Expression::parse("a + zz", s), SpecError);
  CHECK_THROWS_AS(Expression::parse("a +", s), SyntaxError);
  CHECK(Expression::parse("b + a * a", s).referenced_symbols() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("division by zero names the expression and configuration") {
  const auto s = parse_space_spec("kernel = \"k\"\n[params]\na = [0, 1]\nb = [1]\n[constraints]\nb % a == 0\n");
  try {
    (void)s.enumerate();
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    const std::string what = e.what();
    CHECK(what.find("b % a == 0") != std::string::npos);
    CHECK(what.find("a=0, b=1") != std::string::npos);
  }
}

TEST_CASE("parse_space_spec examples") {
  const auto conv = load_space_spec(TUNESCAPE_SPACES_DIR "/convolution.spec");
  CHECK(conv.dimensions() == 7);
  CHECK(conv.cartesian_size() == 16ULL * 5 * 4 * 4 * 2 * 2 * 2);
  CHECK(conv.cartesian_size() == 10240);

  const auto free = parse_space_spec("kernel = \"k\"\n[params]\na = [1, 2, 3]\nb = [\"x\", \"y\"]\n");
  CHECK(free.enumerate().size() == free.cartesian_size());

  CHECK_THROWS_AS(parse_space_spec("kernel = \"k\"\n[params]\nblock_size_x = [1]\nblock_size_x = [2]\n"), SpecError);
  CHECK_THROWS_AS(parse_space_spec("kernel = \"k\"\n[params]\na = [1]\n[constraints]\nb > 0\n"), SpecError);
  CHECK_THROWS_AS(parse_space_spec("kernel = \"k\"\n[params]\na = [1, 1]\n"), SpecError);
  CHECK_THROWS_AS(parse_space_spec("kernel = \"k\"\n[params]\na = []\n"), SpecError);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_space_spec("kernel = \"k\"\n[params]\na = [1, 2]\n[constraints]\na <= * 2\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 5);
    CHECK(e.column() == 6);
  }
  try {
    parse_space_spec("kernel = \"k\"\n[params]\na = [1, 2\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("value ranges expand inclusively") {
  const auto s = parse_space_spec("kernel = \"k\"\n[params]\na = [1, 2, 32..128 by 32]\nb = [1..3]\n");
  const auto& a = s.parameters()[0].values;
  REQUIRE(a.size() == 6);
  CHECK(std::get<std::int64_t>(a[5]) == 128);
  CHECK(s.parameters()[1].values.size() == 3);
}

TEST_CASE("enumerate_configs examples") {
  const auto s = xy_space();
  CHECK(keys_of(s, s.enumerate()) == std::vector<std::string>{"1,1", "1,2", "2,2"});

  const auto gemm = load_space_spec(TUNESCAPE_SPACES_DIR "/gemm.spec");
  CHECK(gemm.cartesian_size() == 4ULL * 4 * 2 * 3 * 3 * 3 * 3 * 4 * 4 * 2 * 2 * 2 * 2);
  CHECK(gemm.cartesian_size() == 663552);
  const auto unconstrained = SearchSpaceSpec(gemm.kernel_name(), gemm.parameters());
  CHECK(unconstrained.count_valid() == 663552);
  const auto conv = load_space_spec(TUNESCAPE_SPACES_DIR "/convolution.spec");
  CHECK(SearchSpaceSpec(conv.kernel_name(), conv.parameters()).enumerate().size() == 10240);
}

TEST_CASE("neighbors examples") {
  const auto s = parse_space_spec("kernel = \"k\"\n[params]\nx = [1, 2, 3]\ny = [\"a\", \"b\"]\n");
  const auto c = *s.parse_key("2,a");
  CHECK(keys_of(s, s.neighbors(c, NeighborScheme::hamming1)) == std::vector<std::string>{"1,a", "3,a", "2,b"});

  const auto chain = parse_space_spec("kernel = \"k\"\n[params]\nv = [1, 2, 4, 8]\n");
  CHECK(keys_of(chain, chain.neighbors(*chain.parse_key("2"), NeighborScheme::adjacent)) ==
        std::vector<std::string>{"1", "4"});

  const auto xy = xy_space();
  CHECK(keys_of(xy, xy.neighbors(*xy.parse_key("1,1"), NeighborScheme::hamming1)) ==
        std::vector<std::string>{"1,2"});
}

TEST_CASE("rank and key round trips") {
  const auto s = load_space_spec(TUNESCAPE_SPACES_DIR "/dedispersion.spec");
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& c : s.enumerate()) {
    const auto r = s.rank(c);
    CHECK((first || r > prev));
    CHECK(s.unrank(r) == c);
    CHECK(*s.parse_key(s.key(c)) == c);
    prev = r;
    first = false;
  }
  CHECK_FALSE(s.parse_key("1,2,3").has_value());
  CHECK_FALSE(s.parse_key("3,32,1,1,0,0").has_value());
}

TEST_CASE("bundled constrained counts") {
  // Constraint transcriptions reproduce the published counts for three kernels; GEMM's
  // divisibility rules admit more points than the published count.
  CHECK(load_space_spec(TUNESCAPE_SPACES_DIR "/convolution.spec").count_valid() == 4362);
  CHECK(load_space_spec(TUNESCAPE_SPACES_DIR "/dedispersion.spec").count_valid() == 11130);
  CHECK(load_space_spec(TUNESCAPE_SPACES_DIR "/hotspot.spec").count_valid() == 105412);
  CHECK(load_space_spec(TUNESCAPE_SPACES_DIR "/gemm.spec").count_valid() == 120800);
  CHECK(load_space_spec(TUNESCAPE_SPACES_DIR "/hotspot.spec").cartesian_size() == 4440000);
}

TEST_CASE("property: enumeration, neighbourhoods and text round trip on random spaces") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rs = oracle::random_space(rng, 3000);
    const auto s = parse_space_spec(rs.spec_text());
    const auto expected = rs.valid_indices();
    const auto got = s.enumerate();
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].indices == expected[i]);
    CHECK(s.count_valid() == expected.size());
    CHECK(serial::count_valid(s) == expected.size());

    const auto again = parse_space_spec(s.to_text());
    CHECK(again == s);
    CHECK(again.fingerprint() == s.fingerprint());

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto scheme : {NeighborScheme::hamming1, NeighborScheme::adjacent}) {
      pairs.clear();
      for (const auto& c : got) {
        const auto nbs = s.neighbors(c, scheme);
        const auto want = rs.neighbours(c.indices, scheme);
        REQUIRE(nbs.size() == want.size());
        for (std::size_t i = 0; i < nbs.size(); ++i) CHECK(nbs[i].indices == want[i]);
        for (const auto& n : nbs) pairs.emplace(s.key(c), s.key(n));
      }
      for (const auto& [a, b] : pairs) CHECK(pairs.count({b, a}) == 1);
    }
    if (rs.constraints.empty() && !got.empty()) {
      std::size_t want = 0;
      for (const auto& v : rs.values) want += v.size() - 1;
      CHECK(s.neighbors(got.front(), NeighborScheme::hamming1).size() == want);
    }
  }
}

TEST_CASE("metric") {
  const auto s = parse_space_spec("kernel = \"k\"\nmetric = 1000 / time_ms\n[params]\na = [1]\n");
  CHECK(s.compute_metric(2.0, *s.parse_key("1")) == doctest::Approx(500.0));
  const auto plain = parse_space_spec("kernel = \"k\"\n[params]\na = [1]\n");
  CHECK(plain.compute_metric(4.0, *plain.parse_key("1")) == 0.25);
  const auto gemm = load_space_spec(TUNESCAPE_SPACES_DIR "/gemm.spec");
  const auto c = gemm.enumerate().front();
  CHECK(gemm.compute_metric(6.938, c) == doctest::Approx(19809.7).epsilon(1e-4));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    double a = t(rng), b = t(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(gemm.compute_metric(a, c) > gemm.compute_metric(b, c));
    CHECK(plain.compute_metric(a, *plain.parse_key("1")) > plain.compute_metric(b, *plain.parse_key("1")));
  }
  CHECK_THROWS_AS(parse_space_spec("kernel = \"k\"\nmetric = time_ms > 1\n[params]\na = [1]\n"), SpecError);
}
