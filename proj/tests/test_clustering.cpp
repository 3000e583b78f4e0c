#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "reference.hpp"
#include "support.hpp"
#include "vidprnu/clustering.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/synth.hpp"

using namespace vidprnu;
using testing::error_kind;

namespace {

SimilarityMatrix matrix(std::size_t n, const std::vector<double>& upper) {
  SimilarityMatrix sim;
  for (std::size_t i = 0; i < n; ++i) sim.ids.push_back("v" + std::to_string(i));
  sim.values.assign(n * n, 1.0);
  std::size_t at = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sim(i, j) = sim(j, i) = upper[at++];
  return sim;
}

SimilarityMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> upper(n * (n - 1) / 2);
  for (auto& v : upper) v = u(rng);
  return matrix(n, upper);
}

// Two blocks of near-identical items with weak cross-similarity.
SimilarityMatrix blocks(const std::vector<std::size_t>& labels, double within, double cross, unsigned seed) {
  const std::size_t n = labels.size();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::vector<double> upper;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back((labels[i] == labels[j] ? within : cross) + jitter(rng));
  return matrix(n, upper);
}

}  // namespace

TEST_SUITE("clustering") {
  TEST_CASE("three-item hand example") {
    SimilarityMatrix sim = matrix(3, {0.9, 0.2, 0.4});
    Dendrogram d = build_dendrogram(sim);
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0] == Merge{0, 1, 0.9, 2});
    // The operand holding leaf 0 is listed first.
    CHECK(d.merges[1].left == 3);
    CHECK(d.merges[1].right == 2);
    CHECK(d.merges[1].similarity == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d.merges[1].size == 3);
    CHECK(cut(d, 2) == std::vector<std::size_t>{0, 0, 1});
    CHECK(cut(d, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(d.members(4) == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("two items merge once") {
    Dendrogram d = build_dendrogram(matrix(2, {0.1}));
    REQUIRE(d.merges.size() == 1);
    CHECK(d.merges[0] == Merge{0, 1, 0.1, 2});
  }

  TEST_CASE("ties go to the lexicographically smallest pair") {
    Dendrogram d = build_dendrogram(matrix(4, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}));
    CHECK(d.merges[0].left == 0);
    CHECK(d.merges[0].right == 1);
    CHECK(d.merges[1].left == 4);
    CHECK(d.merges[1].right == 2);
    CHECK(d.merges[2].left == 5);
    CHECK(d.merges[2].right == 3);
  }

  TEST_CASE("merge sequence matches the recompute-everything reference") {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 3 + trial % 12;
      SimilarityMatrix sim = random_matrix(n, rng);
      Dendrogram d = build_dendrogram(sim);
      auto expect = reference::average_linkage(sim.values, n);
      REQUIRE(d.merges.size() == expect.size());
      for (std::size_t s = 0; s < expect.size(); ++s) {
        CHECK(d.merges[s].left == expect[s].left);
        CHECK(d.merges[s].right == expect[s].right);
        CHECK(d.merges[s].size == expect[s].size);
        CHECK(d.merges[s].similarity == doctest::Approx(expect[s].similarity).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("every merge takes the best available pair") {
    std::mt19937_64 rng(82);
    SimilarityMatrix sim = random_matrix(15, rng);
    Dendrogram d = build_dendrogram(sim);
    std::vector<std::vector<std::size_t>> active;
    for (std::size_t i = 0; i < 15; ++i) active.push_back({i});
    std::vector<std::size_t> id_of(15);
    std::iota(id_of.begin(), id_of.end(), std::size_t{0});
    for (std::size_t s = 0; s < d.merges.size(); ++s) {
      double best = -2;
      for (std::size_t u = 0; u < active.size(); ++u)
        for (std::size_t v = u + 1; v < active.size(); ++v) {
          double t = 0;
          for (auto i : active[u])
            for (auto j : active[v]) t += sim(i, j);
          best = std::max(best, t / double(active[u].size() * active[v].size()));
        }
      CHECK(d.merges[s].similarity == doctest::Approx(best).epsilon(1e-12));
      auto l = std::find(id_of.begin(), id_of.end(), d.merges[s].left) - id_of.begin();
      auto r = std::find(id_of.begin(), id_of.end(), d.merges[s].right) - id_of.begin();
      active[l].insert(active[l].end(), active[r].begin(), active[r].end());
      id_of[l] = 15 + s;
      active.erase(active.begin() + r);
      id_of.erase(id_of.begin() + r);
    }
  }

  TEST_CASE("cuts produce exactly k clusters") {
    std::mt19937_64 rng(83);
    SimilarityMatrix sim = random_matrix(11, rng);
    Dendrogram d = build_dendrogram(sim);
    for (std::size_t k = 2; k <= 11; ++k) {
      auto labels = cut(d, k);
      CHECK(std::set<std::size_t>(labels.begin(), labels.end()).size() == k);
      CHECK(labels[0] == 0);
    }
    // k = 2 splits along the final merge.
    auto labels = cut(d, 2);
    const Merge& last = d.merges.back();
    for (auto leaf : d.members(last.left)) CHECK(labels[leaf] == labels[d.members(last.left)[0]]);
    for (auto leaf : d.members(last.right)) CHECK(labels[leaf] != labels[d.members(last.left)[0]]);
    CHECK(error_kind([&] { cut(d, 1); }) == ErrorKind::Range);
    CHECK(error_kind([&] { cut(d, 12); }) == ErrorKind::Range);
  }

  TEST_CASE("silhouette hand examples") {
    // Two pairs: within 0.1, across 0.9.
    std::vector<double> dist{0, 0.1, 0.9, 0.9, 0.1, 0, 0.9, 0.9, 0.9, 0.9, 0, 0.1, 0.9, 0.9, 0.1, 0};
    auto rep = silhouette(std::vector<std::size_t>{0, 0, 1, 1}, dist);
    for (double s : rep.scores) CHECK(s == doctest::Approx(0.8 / 0.9).epsilon(1e-12));
    CHECK(rep.coefficient == doctest::Approx(0.8889).epsilon(1e-4));
    CHECK(rep.cohesion[0] == doctest::Approx(0.1));
    CHECK(rep.separation[0] == doctest::Approx(0.9));

    auto single = silhouette(std::vector<std::size_t>{0, 0, 0, 1}, dist);
    CHECK(single.scores[3] == 0.0);

    std::vector<double> equal(9, 0.5);
    for (std::size_t i = 0; i < 3; ++i) equal[i * 3 + i] = 0;
    for (double s : silhouette(std::vector<std::size_t>{0, 0, 1}, equal).scores) CHECK(s == 0.0);
    CHECK(error_kind([&] { silhouette(std::vector<std::size_t>{0, 0, 0}, equal); }) == ErrorKind::Range);
    CHECK(error_kind([&] { silhouette(std::vector<std::size_t>{0, 2, 2}, equal); }) == ErrorKind::Range);
  }

  TEST_CASE("silhouette matches the direct definition") {
    std::mt19937_64 rng(84);
    for (int trial = 0; trial < 100; ++trial) {
      SimilarityMatrix sim = random_matrix(12, rng);
      auto dist = distance_matrix(sim);
      Dendrogram d = build_dendrogram(sim);
      for (std::size_t k = 2; k < 12; ++k) {
        auto labels = cut(d, k);
        auto rep = silhouette(labels, dist);
        auto expect = reference::silhouette_scores(labels, dist);
        double mean = 0;
        for (std::size_t i = 0; i < 12; ++i) {
          CHECK(rep.scores[i] == doctest::Approx(expect[i]).epsilon(1e-9));
          CHECK(rep.scores[i] >= -1.0);
          CHECK(rep.scores[i] <= 1.0);
          mean += rep.scores[i];
        }
        CHECK(rep.coefficient == doctest::Approx(mean / 12).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("two separated groups select k = 2") {
    SimilarityMatrix sim = blocks({0, 0, 0, 1, 1, 1, 1}, 0.8, 0.0, 85);
    ClusterResult r = select_clustering(sim);
    CHECK(r.k == 2);
    CHECK(r.labels == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 1});
    CHECK(r.silhouette > 0.5);
  }

  TEST_CASE("equidistant items tie at SC 0 and keep the smallest k") {
    SimilarityMatrix sim = matrix(3, {0.3, 0.3, 0.3});
    ClusterResult r = select_clustering(sim);
    CHECK(r.k == 2);
    CHECK(r.silhouette == 0.0);
  }

  TEST_CASE("fixed k and argument errors") {
    SimilarityMatrix sim = blocks({0, 0, 1, 1, 2, 2}, 0.9, 0.1, 86);
    CHECK(select_clustering(sim, 3).k == 3);
    CHECK(select_clustering(sim).k == 3);
    CHECK(error_kind([&] { select_clustering(sim, 6); }) == ErrorKind::Range);
    CHECK(error_kind([&] { select_clustering(sim, 1); }) == ErrorKind::Range);
    CHECK(error_kind([] { select_clustering(matrix(2, {0.5})); }) == ErrorKind::TooFewItems);
    SimilarityMatrix skew = matrix(3, {0.1, 0.2, 0.3});
    skew(0, 1) = 0.7;
    CHECK(error_kind([&] { build_dendrogram(skew); }) == ErrorKind::Matrix);
  }

  TEST_CASE("permuting the items permutes the assignment") {
    std::mt19937_64 rng(87);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 10;
      SimilarityMatrix sim = random_matrix(n, rng);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      SimilarityMatrix p;
      for (std::size_t i = 0; i < n; ++i) p.ids.push_back(sim.ids[perm[i]]);
      p.values.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = sim(perm[i], perm[j]);
      ClusterResult a = select_clustering(sim), b = select_clustering(p);
      CHECK(a.k == b.k);
      CHECK(a.silhouette == doctest::Approx(b.silhouette).epsilon(1e-12));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          CHECK((a.labels[perm[i]] == a.labels[perm[j]]) == (b.labels[i] == b.labels[j]));
      CHECK(select_clustering(sim).labels == a.labels);
    }
  }

  TEST_CASE("unbalanced synthetic devices cluster into pure groups") {
    const std::vector<std::size_t> counts{27, 11, 7, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3};
    SynthConfig cfg;
    cfg.devices = counts.size();
    cfg.videos_per_device = counts;
    cfg.width = 128;
    cfg.height = 96;
    cfg.frames = 8;
    cfg.seed = 9;
    std::vector<Fingerprint> fps;
    GroundTruth truth;
    for (std::size_t d = 0; d < cfg.devices; ++d) {
      const SynthDevice dev = make_device(cfg, d);
      for (std::size_t v = 0; v < counts[d]; ++v) {
        const auto video = make_video(cfg, dev, d, v);
        fps.push_back(extract_video_fingerprint(video.set, DenoiserParams{}, EnhancerParams{}, video.id));
        truth[video.id] = video.device_id;
      }
    }
    ClusterResult r = select_clustering(build_matrix(fps));
    CHECK(r.k >= 13);
    CHECK(r.k <= 14);
    for (const auto& group : r.clusters()) {
      std::set<std::string> devices;
      for (const auto& id : group) devices.insert(truth.at(id));
      CHECK(devices.size() == 1);
    }
  }

  TEST_CASE("agglomeration cost grows roughly quadratically") {
    auto time_for = [](std::size_t n) {
      std::mt19937_64 rng(88);
      SimilarityMatrix sim = random_matrix(n, rng);
      double best = 1e9;
      for (int rep = 0; rep < 3; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        Dendrogram d = build_dendrogram(sim);
        auto t1 = std::chrono::steady_clock::now();
        CHECK(d.merges.size() == n - 1);
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
      }
      return best;
    };
    const double small = time_for(400), large = time_for(800);
    MESSAGE("agglomeration 400 -> 800 items: " << small << " s -> " << large << " s, ratio " << large / small);
    CHECK(large / small <= 4.5);
  }

  TEST_CASE("clusters JSON round trip") {
    SimilarityMatrix sim = blocks({0, 0, 1, 1, 1}, 0.9, 0.1, 89);
    ClusterResult r = select_clustering(sim);
    const std::string text = clusters_to_json(r);
    auto groups = clusters_from_json(text);
    CHECK(groups == r.clusters());
    CHECK(groups == std::vector<std::vector<std::string>>{{"v0", "v1"}, {"v2", "v3", "v4"}});
    CHECK(text.find("\"k\": 2") != std::string::npos);
    CHECK(error_kind([] { clusters_from_json("{\"k\": 1}"); }) == ErrorKind::Format);
    CHECK(error_kind([] { clusters_from_json("not json"); }) == ErrorKind::Format);
  }
}
