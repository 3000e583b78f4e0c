#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "vidprnu/metrics.hpp"

using namespace vidprnu;
using testing::error_kind;

namespace {

// Builds clusters from per-group device counts and labels every video with
// its device. Devices absent from `totals` get exactly the videos they use.
struct Confusion {
  std::vector<std::vector<std::string>> clusters;
  GroundTruth truth;
};

Confusion confusion(const std::vector<std::vector<std::pair<std::string, int>>>& groups,
                    const std::map<std::string, int>& totals) {
  Confusion c;
  std::map<std::string, int> used;
  for (const auto& g : groups) {
    std::vector<std::string> members;
    for (const auto& [device, count] : g)
      for (int i = 0; i < count; ++i) {
        const std::string id = device + "_" + std::to_string(++used[device]);
        members.push_back(id);
        c.truth[id] = device;
      }
    c.clusters.push_back(members);
  }
  for (const auto& [device, total] : totals) {
    REQUIRE(used[device] <= total);
    while (used[device] < total) {
      const std::string id = device + "_" + std::to_string(++used[device]);
      c.truth[id] = device;
    }
  }
  return c;
}

const std::map<std::string, int> kTotals{{"M00", 8},  {"M12", 10}, {"M17", 10}, {"M27", 10},
                                         {"M28", 10}, {"M29", 10}, {"M31", 10}, {"M32", 10}};

Confusion nine_groups() {
  return confusion({{{"M32", 5}},
                    {{"M27", 10}},
                    {{"M31", 10}},
                    {{"M28", 10}},
                    {{"M17", 7}},
                    {{"M29", 10}},
                    {{"M12", 10}},
                    {{"M32", 2}, {"M17", 3}, {"M00", 2}},
                    {{"M32", 3}, {"M00", 6}}},
                   kTotals);
}

Confusion ten_groups() {
  return confusion({{{"M32", 7}},
                    {{"M27", 10}},
                    {{"M31", 10}},
                    {{"M28", 10}},
                    {{"M17", 8}},
                    {{"M29", 10}},
                    {{"M12", 10}},
                    {{"M32", 3}, {"M00", 3}},
                    {{"M00", 5}},
                    {{"M17", 2}}},
                   kTotals);
}

std::vector<double> percents(const TprSummary& s) {
  std::vector<double> out;
  for (const auto& g : s.groups) out.push_back(g.percent);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("group TPR examples") {
    Confusion c = nine_groups();
    auto g1 = group_tpr(c.clusters[0], c.truth);
    CHECK(g1.percent == 50.0);
    CHECK(g1.device == "M32");
    CHECK(g1.pure);
    CHECK(g1.hits == 5);
    CHECK(g1.denominator == 10);
    auto g8 = group_tpr(c.clusters[7], c.truth);
    CHECK(g8.percent == 0.0);
    CHECK_FALSE(g8.pure);
    CHECK(group_tpr(c.clusters[1], c.truth).percent == 100.0);

    std::vector<std::string> reversed(c.clusters[8].rbegin(), c.clusters[8].rend());
    CHECK(group_tpr(reversed, c.truth).percent == group_tpr(c.clusters[8], c.truth).percent);
  }

  TEST_CASE("nine-group confusion: pure rule") {
    Confusion c = nine_groups();
    TprSummary s = average_tpr(c.clusters, c.truth);
    CHECK(percents(s) == std::vector<double>{50, 100, 100, 100, 70, 100, 100, 0, 0});
    CHECK(s.average == doctest::Approx(620.0 / 9.0).epsilon(1e-14));
    CHECK(std::abs(s.average - 68.0) <= 1.0);
  }

  TEST_CASE("nine-group confusion: majority rule") {
    Confusion c = nine_groups();
    TprSummary s = average_tpr(c.clusters, c.truth, {true, std::nullopt});
    CHECK(percents(s) == std::vector<double>{50, 100, 100, 100, 70, 100, 100, 30, 75});
    CHECK(s.groups[7].device == "M17");
    CHECK(s.groups[8].device == "M00");
  }

  TEST_CASE("ten-group confusion with true and fixed denominators") {
    Confusion c = ten_groups();
    TprSummary s = average_tpr(c.clusters, c.truth);
    CHECK(percents(s) == std::vector<double>{70, 100, 100, 100, 80, 100, 100, 0, 62.5, 20});
    CHECK(s.average == 73.25);

    TprSummary fixed = average_tpr(c.clusters, c.truth, {false, 10});
    CHECK(percents(fixed) == std::vector<double>{70, 100, 100, 100, 80, 100, 100, 0, 50, 20});
    CHECK(fixed.average == 72.0);
  }

  TEST_CASE("perfect clustering scores exactly 100") {
    Confusion c = confusion({{{"A", 3}}, {{"B", 4}}, {{"C", 1}}}, {});
    CHECK(average_tpr(c.clusters, c.truth).average == 100.0);
  }

  TEST_CASE("predominant device ties go to the smaller id") {
    Confusion c = confusion({{{"B", 2}, {"A", 2}}}, {});
    auto g = group_tpr(c.clusters[0], c.truth, {true, std::nullopt});
    CHECK(g.device == "A");
    CHECK(g.percent == 100.0);
  }

  TEST_CASE("TPR errors") {
    GroundTruth truth{{"a", "X"}, {"b", "X"}};
    CHECK(error_kind([&] { group_tpr(std::vector<std::string>{"a", "zz"}, truth); }) == ErrorKind::Label);
    CHECK(error_kind([&] { group_tpr(std::vector<std::string>{}, truth); }) == ErrorKind::Range);
    std::vector<std::vector<std::string>> dup{{"a"}, {"a", "b"}};
    CHECK(error_kind([&] { average_tpr(dup, truth); }) == ErrorKind::Label);
  }

  TEST_CASE("ROC examples") {
    auto perfect = roc_from_scores(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1});
    CHECK(perfect.auc == 1.0);
    auto mixed = roc_from_scores(std::vector<double>{0.8, 0.4}, std::vector<double>{0.6, 0.2});
    CHECK(mixed.auc == 0.75);
    auto reversed = roc_from_scores(std::vector<double>{0.2, 0.1}, std::vector<double>{0.9, 0.8});
    CHECK(reversed.auc == 0.0);
    auto tie = roc_from_scores(std::vector<double>{0.5}, std::vector<double>{0.5});
    CHECK(tie.auc == 0.5);

    REQUIRE(mixed.points.size() == 5);
    CHECK(mixed.points.front().fpr == 0.0);
    CHECK(mixed.points.front().tpr == 0.0);
    CHECK(mixed.points.back().fpr == 1.0);
    CHECK(mixed.points.back().tpr == 1.0);
    CHECK(mixed.points[1].tpr == 0.5);
    CHECK(mixed.points[1].fpr == 0.0);
    CHECK(error_kind([] { roc_from_scores(std::vector<double>{}, std::vector<double>{0.1}); }) ==
          ErrorKind::DegenerateLabels);
    CHECK(error_kind([] { roc_from_scores(std::vector<double>{0.1}, std::vector<double>{}); }) ==
          ErrorKind::DegenerateLabels);
  }

  TEST_CASE("identically distributed scores give chance AUC") {
    std::mt19937_64 rng(91);
    std::normal_distribution<double> g;
    std::vector<double> pos(4000), neg(4000);
    for (auto& v : pos) v = g(rng);
    for (auto& v : neg) v = g(rng);
    CHECK(std::abs(roc_from_scores(pos, neg).auc - 0.5) < 0.03);
  }

  TEST_CASE("trapezoid area equals the rank statistic") {
    std::mt19937_64 rng(92);
    for (int trial = 0; trial < 100; ++trial) {
      std::uniform_int_distribution<int> count(1, 40), level(0, 9);
      std::vector<double> pos(count(rng)), neg(count(rng));
      // Coarse levels force ties between and within the classes.
      for (auto& v : pos) v = level(rng) / 10.0 + 0.05;
      for (auto& v : neg) v = level(rng) / 10.0;
      if (trial % 2) for (auto& v : neg) v += 0.05;
      auto roc = roc_from_scores(pos, neg);
      CHECK(std::abs(roc.auc - mann_whitney_auc(pos, neg)) <= 1e-12);
      for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
      }
    }
  }

  TEST_CASE("pairwise ROC from a similarity matrix") {
    SimilarityMatrix sim;
    sim.ids = {"a", "b", "c", "d"};
    sim.values = {1, 0.9, 0.1, 0.2, 0.9, 1, 0.3, 0.0, 0.1, 0.3, 1, 0.8, 0.2, 0.0, 0.8, 1};
    GroundTruth truth{{"a", "X"}, {"b", "X"}, {"c", "Y"}, {"d", "Y"}};
    auto roc = roc_auc(sim, truth);
    CHECK(roc.positives == 2);
    CHECK(roc.negatives == 4);
    CHECK(roc.auc == 1.0);
    GroundTruth one{{"a", "X"}, {"b", "X"}, {"c", "X"}, {"d", "X"}};
    CHECK(error_kind([&] { roc_auc(sim, one); }) == ErrorKind::DegenerateLabels);
    GroundTruth missing{{"a", "X"}, {"b", "X"}, {"c", "Y"}};
    CHECK(error_kind([&] { roc_auc(sim, missing); }) == ErrorKind::Label);
  }

  TEST_CASE("labels CSV") {
    GroundTruth t = parse_labels("video_id,device_id\nv1,D01\r\nv2, D02\n\n");
    CHECK(t == GroundTruth{{"v1", "D01"}, {"v2", "D02"}});
    CHECK(parse_labels(labels_to_csv(t)) == t);
    CHECK(error_kind([] { parse_labels("id,device\nv1,D01\n"); }) == ErrorKind::Format);
    CHECK(error_kind([] { parse_labels("video_id,device_id\nv1,D01\nv1,D02\n"); }) == ErrorKind::Format);
    CHECK(error_kind([] { parse_labels("video_id,device_id\nv1\n"); }) == ErrorKind::Format);
    testing::TempDir dir;
    write_labels(dir / "labels.csv", t);
    CHECK(read_labels(dir / "labels.csv") == t);
    CHECK(error_kind([&] { read_labels(dir / "absent.csv"); }) == ErrorKind::Io);
    CHECK(device_totals(t) == std::map<std::string, std::size_t>{{"D01", 1}, {"D02", 1}});
  }

  TEST_CASE("report JSON") {
    Confusion c = confusion({{{"A", 2}}, {{"A", 1}, {"B", 2}}}, {});
    SimilarityMatrix sim;
    for (const auto& g : c.clusters) sim.ids.insert(sim.ids.end(), g.begin(), g.end());
    sim.values.assign(25, 0.1);
    for (std::size_t i = 0; i < 5; ++i) sim.values[i * 6] = 1.0;
    EvalReport r = evaluate(c.clusters, c.truth, &sim);
    CHECK(r.tpr_rule == "pure");
    auto j = nlohmann::json::parse(report_to_json(r, c.clusters));
    CHECK(j["k"] == 2);
    CHECK(j["tpr_rule"] == "pure");
    CHECK(j["groups"][0]["group"] == "G1");
    CHECK(j["groups"][0]["tpr"].get<double>() == doctest::Approx(66.7));
    CHECK(j["groups"][1]["pure"] == false);
    CHECK(j["groups"][1]["videos"].size() == 3);
    CHECK(j["average_tpr"].get<double>() == doctest::Approx(33.3));
    CHECK(j["auc"].get<double>() == 0.5);
    CHECK(j["positive_pairs"] == 4);
    CHECK(j["negative_pairs"] == 6);

    EvalReport no_roc = evaluate(c.clusters, c.truth, nullptr, {true, std::nullopt});
    auto k = nlohmann::json::parse(report_to_json(no_roc, c.clusters));
    CHECK(k["tpr_rule"] == "majority");
    CHECK(k["auc"].is_null());
    CHECK(roc_to_csv(*r.roc).rfind("fpr,tpr\n0,0\n", 0) == 0);
  }
}
