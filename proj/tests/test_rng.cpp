#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "snq/rng.hpp"
#include "snq/stats.hpp"

using namespace snq;

TEST_CASE("philox known-answer vectors") {
  // Random123 kat_vectors for philox4x32-10: key 0, counter 0 and the
  // pi-digits pattern. Our stream packs (rep, role) into the counter, so the
  // zero vector is reachable with rep = role = 0.
  RngStream zero(0, 0, 0u);
  const std::uint64_t w0 = zero.next_u64();
  const std::uint64_t w1 = zero.next_u64();
  CHECK(w0 == ((0xe169c58dull << 32) | 0x6627e8d5ull));
  CHECK(w1 == ((0x9b00dbd8ull << 32) | 0xbc57ac4cull));
}

TEST_CASE("streams are deterministic and distinct") {
  RngStream a(42, 7, StreamRole::Shots);
  RngStream b(42, 7, StreamRole::Shots);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 7, StreamRole::Services);
  RngStream d(42, 8, StreamRole::Shots);
  RngStream e(43, 7, StreamRole::Shots);
  RngStream f(42, 7, StreamRole::Shots);
  bool all_equal_c = true, all_equal_d = true, all_equal_e = true;
  for (int i = 0; i < 100; ++i) {
    const auto x = f.next_u64();
    all_equal_c &= (c.next_u64() == x);
    all_equal_d &= (d.next_u64() == x);
    all_equal_e &= (e.next_u64() == x);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
  CHECK_FALSE(all_equal_e);
}

TEST_CASE("no collisions across two distinct streams") {
  RngStream a(2026, 1, StreamRole::Shots);
  RngStream b(2026, 2, StreamRole::Shots);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000000; ++i) seen.insert(a.next_u64());
  for (int i = 0; i < 1000000; ++i) CHECK_FALSE(seen.count(b.next_u64()));
}

TEST_CASE("uniform01 lies in [0,1) and has the right moments") {
  RngStream rng(1, 0, StreamRole::Scratch);
  Moments m;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    m.add(u);
  }
  CHECK(std::abs(m.mean - 0.5) < 4.0 * m.se_mean());
  CHECK(std::abs(m.variance() - 1.0 / 12.0) < 4.0 * m.se_variance());
}

TEST_CASE("exponential and gamma samplers match their moments") {
  RngStream rng(7, 0, StreamRole::Scratch);
  Moments me;
  for (int i = 0; i < 200000; ++i) me.add(rng.exponential(2.0));
  CHECK(std::abs(me.mean - 0.5) < 4.0 * me.se_mean());

  Moments mg;
  for (int i = 0; i < 200000; ++i) mg.add(rng.gamma(2.5, 2.0));
  CHECK(std::abs(mg.mean - 1.25) < 4.0 * mg.se_mean());
  CHECK(std::abs(mg.variance() - 2.5 / 4.0) < 4.0 * mg.se_variance());

  Moments ms;  // shape < 1 path
  for (int i = 0; i < 200000; ++i) ms.add(rng.gamma(0.5, 1.0));
  CHECK(std::abs(ms.mean - 0.5) < 4.0 * ms.se_mean());
}

TEST_CASE("normal sampler moments") {
  RngStream rng(9, 0, StreamRole::LimitSde);
  Moments m;
  for (int i = 0; i < 200000; ++i) m.add(rng.normal());
  CHECK(std::abs(m.mean) < 4.0 * m.se_mean());
  CHECK(std::abs(m.variance() - 1.0) < 4.0 * m.se_variance());
}

TEST_CASE("shot and service streams of one replication are uncorrelated") {
  const int n = 100000;
  std::vector<double> a(n), b(n);
  RngStream s1(123, 5, StreamRole::Shots);
  RngStream s2(123, 5, StreamRole::Services);
  for (int i = 0; i < n; ++i) {
    a[i] = s1.uniform01();
    b[i] = s2.uniform01();
  }
  const double corr = pearson_correlation(a, b);
  CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("replication index beyond 48 bits is rejected") {
  CHECK_THROWS_AS(RngStream(1, 1ull << 48, StreamRole::Shots), std::invalid_argument);
}
