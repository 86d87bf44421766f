#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maxent/market_data.hpp"
#include "support.hpp"

using namespace maxent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

auto has_code(ErrorCode c) {
  return Catch::Matchers::Predicate<Error>([c](const Error& e) { return e.code() == c; }, "error code matches");
}

const MarketSlice one_strike{100.0, 1.0, {100.0}, {9.9477}};
const MarketSlice two_strikes{100.0, 1.0, {80.0, 120.0}, {22.2656, 3.7059}};

}  // namespace

TEST_CASE("digital rectangle of the one-strike example") {
  const DigitalRectangle omega = validate_slice(one_strike);
  REQUIRE(omega.size() == 1);
  CHECK(omega.lower[0] == 0.0);
  CHECK_THAT(omega.upper[0], WithinAbs(0.900523, 5e-7));
}

TEST_CASE("digital rectangle of the two-strike example") {
  const DigitalRectangle omega = validate_slice(two_strikes);
  CHECK_THAT(omega.lower[0], WithinAbs(0.46399, 5e-6));
  CHECK_THAT(omega.upper[0], WithinAbs(0.97168, 5e-6));
  CHECK_THAT(omega.lower[1], WithinAbs(0.0, 0.0));
  CHECK_THAT(omega.upper[1], WithinAbs(0.46399, 5e-6));
}

TEST_CASE("arbitrage violations are rejected") {
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {90.0, 110.0}, {5.0, 6.0}}), Error,
                       has_code(ErrorCode::NonMonotoneCalls));
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {110.0, 90.0}, {5.0, 15.0}}), Error,
                       has_code(ErrorCode::BadStrikes));
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {90.0, 90.0}, {15.0, 14.0}}), Error,
                       has_code(ErrorCode::BadStrikes));
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {-5.0}, {15.0}}), Error, has_code(ErrorCode::BadStrikes));
  // Linear calls: the spreads on both sides of 100 coincide.
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {90.0, 100.0, 110.0}, {20.0, 15.0, 10.0}}), Error,
                       has_code(ErrorCode::NonConvexCalls));
  // At intrinsic value: upper bound of the first digital reaches 1.
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {50.0}, {50.0}}), Error, has_code(ErrorCode::NonConvexCalls));
  CHECK_THROWS_MATCHES(validate_slice({100.0, 1.0, {50.0}, {0.0}}), Error, has_code(ErrorCode::NonMonotoneCalls));
}

TEST_CASE("error messages name the offending strike") {
  try {
    validate_slice({100.0, 1.0, {90.0, 110.0}, {5.0, 6.0}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("110"));
    CHECK(e.is_arbitrage());
  }
}

TEST_CASE("discounted quotes are converted once") {
  const std::vector<double> discounted{9.0, 4.5};
  const MarketSlice s = MarketSlice::from_discounted(100.0, 0.9, {95.0, 105.0}, discounted);
  CHECK_THAT(s.calls[0], WithinRel(10.0, 1e-15));
  CHECK_THAT(s.calls[1], WithinRel(5.0, 1e-15));
  CHECK(s.call(0) == 100.0);
  CHECK(s.call(3) == 0.0);
  CHECK(s.strike(0) == 0.0);
}

TEST_CASE("bucket statistics") {
  SECTION("forward only") {
    const MarketSlice s{100.0, 1.0, {}, {}};
    const BucketStats st = bucket_stats(s, DigitalVector{});
    REQUIRE(st.p.size() == 1);
    CHECK(st.p[0] == 1.0);
    CHECK_THAT(st.kbar[0], WithinRel(100.0, 1e-15));
  }
  SECTION("one strike") {
    const BucketStats st = bucket_stats(one_strike, DigitalVector{{0.4962}});
    CHECK_THAT(st.p[0], WithinRel(0.5038, 1e-14));
    CHECK_THAT(st.p[1], WithinRel(0.4962, 1e-14));
    CHECK_THAT(st.kbar[0], WithinRel((100.0 - (9.9477 + 100.0 * 0.4962)) / 0.5038, 1e-13));
    CHECK_THAT(st.kbar[1], WithinRel((9.9477 + 100.0 * 0.4962) / 0.4962, 1e-13));
    CHECK_THAT(st.p[0] * st.kbar[0] + st.p[1] * st.kbar[1], WithinRel(100.0, 1e-13));
  }
  SECTION("boundary digitals are outside") {
    const DigitalRectangle omega = validate_slice(one_strike);
    CHECK_THROWS_MATCHES(bucket_stats(one_strike, DigitalVector{{omega.upper[0]}}), Error,
                         has_code(ErrorCode::OutOfRectangle));
    CHECK_THROWS_MATCHES(bucket_stats(one_strike, DigitalVector{{0.0}}), Error, has_code(ErrorCode::OutOfRectangle));
    CHECK_THROWS_MATCHES(bucket_stats(one_strike, DigitalVector{{0.3, 0.2}}), Error,
                         has_code(ErrorCode::OutOfRectangle));
  }
}

TEST_CASE("bucket statistics invariants on random slices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto [slice, omega] = testing::random_slice(rng, 1 + trial % 8);
    const DigitalVector d = testing::random_interior(rng, omega);
    const BucketStats st = bucket_stats(slice, omega, d);
    double mass = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < st.p.size(); ++i) {
      CHECK(st.p[i] > 0.0);
      const Bucket b = slice.bucket(i);
      CHECK(st.kbar[i] > b.lo);
      CHECK(st.kbar[i] < b.hi);
      mass += st.p[i];
      mean += st.p[i] * st.kbar[i];
    }
    CHECK_THAT(mass, WithinRel(1.0, 1e-12));
    CHECK_THAT(mean, WithinRel(slice.forward, 1e-12));
  }
}

TEST_CASE("centered call spread digitals") {
  SECTION("two-strike example with midpoint ends") {
    const DigitalVector d = ccs_digitals(two_strikes);
    CHECK_THAT(d[0], WithinAbs(0.71784, 1e-5));
    CHECK_THAT(d[1], WithinAbs(0.23199, 1e-5));
  }
  SECTION("equal spacing gives the midpoint of the spreads") {
    const MarketSlice s = testing::flat_bs_slice();
    const DigitalRectangle omega = validate_slice(s);
    const DigitalVector d = ccs_digitals(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK_THAT(d[i], WithinAbs(0.5 * (omega.lower[i] + omega.upper[i]), 1e-14));
    }
  }
  SECTION("S&P three-strike interior value") {
    const MarketSlice full = testing::load_quotes("spx_2010-12-18.csv").slice();
    const std::vector<std::size_t> idx{0, 8, 16};
    const DigitalVector d = ccs_digitals(full.subset(idx), EndpointRule::supplied, std::make_pair(0.843, 0.095));
    CHECK_THAT(d[1], WithinAbs(0.507, 5e-4));
    CHECK(d[0] == 0.843);
    CHECK(d[2] == 0.095);
  }
  SECTION("supplied ends outside Omega are pulled inside") {
    const DigitalRectangle omega = validate_slice(two_strikes);
    const DigitalVector d = ccs_digitals(two_strikes, EndpointRule::supplied, std::make_pair(1.5, -0.2));
    CHECK(omega.contains(d));
    CHECK_THAT(d[0], WithinAbs(omega.upper[0], 1e-8));
    CHECK_THAT(d[1], WithinAbs(omega.lower[1], 1e-8));
  }
  SECTION("needs a strike") {
    CHECK_THROWS_MATCHES(ccs_digitals(MarketSlice{100.0, 1.0, {}, {}}), Error, has_code(ErrorCode::InvalidSlice));
  }
}

TEST_CASE("centered call spreads are always interior") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto [slice, omega] = testing::random_slice(rng, 1 + trial % 8);
    CHECK(omega.contains(ccs_digitals(slice)));
  }
}

TEST_CASE("subsets keep the chosen strikes") {
  const MarketSlice s = testing::flat_bs_slice();
  const std::vector<std::size_t> idx{0, 8, 16};
  const MarketSlice sub = s.subset(idx);
  REQUIRE(sub.size() == 3);
  CHECK(sub.strikes[1] == 100.0);
  CHECK(sub.calls[2] == s.calls[16]);
  const std::vector<std::size_t> bad{0, 17};
  CHECK_THROWS_AS(s.subset(bad), Error);
}
