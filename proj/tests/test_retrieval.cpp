#include "mcvl/retrieval.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace mcvl;
using namespace mcvl::retrieval;

namespace {

MapEntry make_entry(std::vector<float> desc, geometry::Vec3 pos,
                    geometry::EulerTriple orient = {0, 0, 0}) {
  MapEntry e;
  e.descriptor = std::move(desc);
  e.pose.position = pos;
  e.pose.orientation = orient;
  return e;
}

encoder::GlobalDescriptor query_of(std::vector<float> values) {
  encoder::GlobalDescriptor q;
  q.values = std::move(values);
  return q;
}

}  // namespace

TEST_CASE("knn returns an exact-match entry first") {
  MapDatabase db;
  db.entries.push_back(make_entry({1, 0}, {0, 0, 0}));
  db.entries.push_back(make_entry({0, 1}, {1, 0, 0}));
  const auto hits = knn(db, query_of({0, 1}), 2);
  CHECK(hits[0].index == 1);
  CHECK(hits[0].distance == 0.0);
  CHECK(hits.size() == 2);
}

TEST_CASE("knn with R = database size returns everything sorted") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  MapDatabase db;
  for (int i = 0; i < 30; ++i) {
    db.entries.push_back(make_entry({uni(rng), uni(rng), uni(rng)},
                                    {static_cast<double>(i), 0, 0}));
  }
  const auto hits = knn(db, query_of({0.1f, 0.2f, 0.3f}), 30);
  REQUIRE(hits.size() == 30);
  CHECK(std::is_sorted(hits.begin(), hits.end(),
                       [](const Neighbor& a, const Neighbor& b) {
                         return a.distance < b.distance;
                       }));
}

TEST_CASE("knn matches an exhaustive double-precision oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  for (std::size_t dim : {64u, 256u, 512u}) {
    MapDatabase db;
    for (int i = 0; i < 1000; ++i) {
      std::vector<float> d(dim);
      for (auto& v : d) v = uni(rng);
      db.entries.push_back(make_entry(std::move(d), {0, 0, 0}));
    }
    std::vector<float> qv(dim);
    for (auto& v : qv) v = uni(rng);
    const auto q = query_of(qv);

    std::vector<std::pair<double, std::size_t>> oracle;
    for (std::size_t i = 0; i < db.entries.size(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = static_cast<double>(qv[c]) - db.entries[i].descriptor[c];
        s += diff * diff;
      }
      oracle.emplace_back(std::sqrt(s), i);
    }
    std::sort(oracle.begin(), oracle.end());

    const auto hits = knn(db, q, 20);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(hits[i].index == oracle[i].second);
    }
  }
}

TEST_CASE("knn throws on an empty database and clamps large R") {
  MapDatabase db;
  CHECK_THROWS_AS(knn(db, query_of({1.0f}), 5), EmptyDatabase);
  db.entries.push_back(make_entry({1.0f}, {0, 0, 0}));
  CHECK(knn(db, query_of({1.0f}), 100).size() == 1);
}

TEST_CASE("mean_shift on identical points yields one full cluster") {
  const std::vector<geometry::Vec3> pts(7, geometry::Vec3(3, 4, 5));
  const auto clusters = mean_shift(pts, 2.0);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].members.size() == 7);
  CHECK((clusters[0].mode - geometry::Vec3(3, 4, 5)).norm() < 1e-9);
}

TEST_CASE("mean_shift separates two distant groups") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<geometry::Vec3> pts;
  for (int i = 0; i < 12; ++i) {
    pts.emplace_back(noise(rng), noise(rng), 0.0);
  }
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back(100.0 + noise(rng), noise(rng), 0.0);
  }
  const auto clusters = mean_shift(pts, 10.0);
  REQUIRE(clusters.size() == 2);
  std::size_t near = 0, far = 0;
  for (const auto& c : clusters) {
    if (c.mode.x() < 50.0) near = c.members.size();
    else far = c.members.size();
  }
  CHECK(near == 12);
  CHECK(far == 8);
}

TEST_CASE("mean_shift single point") {
  const auto clusters = mean_shift({geometry::Vec3(1, 2, 3)}, 5.0);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].members == std::vector<std::size_t>{0});
}

TEST_CASE("measure with identical retrieved poses returns that pose") {
  MapDatabase db;
  const geometry::Vec3 pos(10, 20, 0);
  const geometry::EulerTriple rot(0.1, 0.0, 0.5);
  for (int i = 0; i < 20; ++i) {
    db.entries.push_back(make_entry({static_cast<float>(i) * 0.001f, 1.0f}, pos, rot));
  }
  RetrievalConfig cfg;
  const Measurement z = measure(db, query_of({0.0f, 1.0f}), cfg);
  CHECK(z.support == 20);
  CHECK((z.pose.position - pos).norm() < 1e-9);
  CHECK(geometry::rotation_error(z.pose.orientation, rot) < 1e-9);
  CHECK_FALSE(z.low_confidence);
}

TEST_CASE("measure picks the 15-member cluster over the 5-member one") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> noise(0.0, 0.5);
  MapDatabase db;
  const geometry::Vec3 a(0, 0, 0), b(200, 0, 0);
  for (int i = 0; i < 20; ++i) {
    const geometry::Vec3 base = i < 15 ? a : b;
    db.entries.push_back(make_entry(
        {static_cast<float>(i) * 0.01f, 1.0f},
        base + geometry::Vec3(noise(rng), noise(rng), 0.0)));
  }
  RetrievalConfig cfg;
  const Measurement z = measure(db, query_of({0.0f, 1.0f}), cfg);
  CHECK(z.support == 15);
  CHECK((z.pose.position - a).norm() < 1.0);
}

TEST_CASE("measure flags a singleton winning cluster") {
  MapDatabase db;
  // Two entries retrieved, 100 m apart; the nearer descriptor wins the
  // size-1 tie on mean retrieval distance.
  db.entries.push_back(make_entry({0.0f, 1.0f}, {0, 0, 0}));
  db.entries.push_back(make_entry({0.5f, 1.0f}, {100, 0, 0}));
  RetrievalConfig cfg;
  cfg.top_r = 2;
  const Measurement z = measure(db, query_of({0.0f, 1.0f}), cfg);
  CHECK(z.support == 1);
  CHECK(z.low_confidence);
  CHECK((z.pose.position - geometry::Vec3(0, 0, 0)).norm() < 1e-12);
}

TEST_CASE("measure is invariant to database permutation") {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<MapEntry> entries;
  for (int i = 0; i < 50; ++i) {
    entries.push_back(make_entry({uni(rng), uni(rng), uni(rng)},
                                 {noise(rng), noise(rng), 0.0},
                                 {0, 0, 0.01 * i}));
  }
  MapDatabase db1;
  db1.entries = entries;
  std::shuffle(entries.begin(), entries.end(), rng);
  MapDatabase db2;
  db2.entries = entries;
  RetrievalConfig cfg;
  const auto q = query_of({0.5f, 0.5f, 0.5f});
  const Measurement z1 = measure(db1, q, cfg);
  const Measurement z2 = measure(db2, q, cfg);
  CHECK((z1.pose.position - z2.pose.position).norm() < 1e-12);
  CHECK(z1.support == z2.support);
}

TEST_CASE("duplicating the winning cluster keeps its mean position") {
  MapDatabase db;
  const geometry::Vec3 a(5, 5, 0);
  for (int i = 0; i < 6; ++i) {
    db.entries.push_back(make_entry({0.01f * i, 1.0f},
                                    a + geometry::Vec3(0.1 * i, 0, 0)));
  }
  RetrievalConfig cfg;
  cfg.top_r = 6;
  const auto q = query_of({0.0f, 1.0f});
  const Measurement before = measure(db, q, cfg);
  const std::size_t n = db.entries.size();
  for (std::size_t i = 0; i < n; ++i) db.entries.push_back(db.entries[i]);
  cfg.top_r = 12;
  const Measurement after = measure(db, q, cfg);
  CHECK((before.pose.position - after.pose.position).norm() < 1e-9);
}
