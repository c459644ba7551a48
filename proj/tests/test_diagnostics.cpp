#include "cwnnk/diagnostics.hpp"
#include "cwnnk/errors.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cwnnk;

namespace {

ChannelLooReport report(ChannelId c, double risk) {
  ChannelLooReport r;
  r.channel = c;
  r.loo_risk = risk;
  return r;
}

}  // namespace

TEST_CASE("zero_stats") {
  CHECK(zero_stats(FeatureMatrix(FeatureMatrix::Zero(4, 3))) == 1.0);
  CHECK(zero_stats(FeatureMatrix(FeatureMatrix::Constant(4, 3, 0.2)), 0.0) == 0.0);
  FeatureMatrix half(2, 2);
  half << 0.0, 1.0, 3.0, 0.0;
  CHECK(zero_stats(half) == 0.5);
  FloatMatrix tiny(1, 4);
  tiny << 1e-8f, -1e-8f, 1e-3f, 0.0f;
  CHECK(zero_stats(tiny) == 0.75);
  CHECK(zero_stats(tiny, 0.0) == 0.25);
  CHECK_THROWS_AS(zero_stats(half, -1.0), InputError);
}

TEST_CASE("neighborhood_stats") {
  const LabelSet labels{{0, 0, 1, 1}, 2};
  SUBCASE("pure neighborhoods") {
    std::map<NodeId, NnkNeighborhood> g{{0, {0, {1}, {0.4}, 0.1}}, {2, {2, {3}, {2.0}, 0.1}}};
    const auto s = neighborhood_stats(g, labels);
    CHECK(s.mean_neighbors == 1.0);
    CHECK(s.mean_same_class_weight == 1.0);
  }
  SUBCASE("mixed") {
    std::map<NodeId, NnkNeighborhood> g{{0, {0, {1, 2}, {0.3, 0.1}, 0.1}},
                                        {3, {3, {0, 1, 2}, {1.0, 1.0, 2.0}, 0.1}}};
    const auto s = neighborhood_stats(g, labels);
    CHECK(s.mean_neighbors == 2.5);
    CHECK(s.mean_same_class_weight == doctest::Approx((0.75 + 0.5) / 2));
  }
  CHECK_THROWS_AS(neighborhood_stats({}, labels), InputError);
}

TEST_CASE("same-class weight is near one half for random labels") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    synth::Rng rng(seed);
    const auto x = synth::gaussian_matrix(150, 4, rng);
    const auto y = synth::random_labels(150, 2, rng);
    NnkConfig c;
    c.k = 10;
    c.kernel = KernelSpec::gaussian_adaptive();
    const auto s = neighborhood_stats(build_channel_graph(x, c), y);
    CHECK(s.mean_same_class_weight >= 0.0);
    CHECK(s.mean_same_class_weight <= 1.0);
    total += s.mean_same_class_weight;
  }
  CHECK(total / 10.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("rank_channels") {
  const auto r = rank_channels({report(0, 0.5), report(1, 0.1), report(2, 0.3)});
  CHECK(r.order == std::vector<ChannelId>{1, 2, 0});
  CHECK(r.passing == std::vector<ChannelId>{1, 2});

  const auto tie = rank_channels({report(2, 0.2), report(0, 0.2), report(1, 0.2)});
  CHECK(tie.order == std::vector<ChannelId>{0, 1, 2});

  CHECK(rank_channels({report(0, 0.9)}).order == std::vector<ChannelId>{0});
  CHECK(rank_channels({report(0, 0.9)}).passing.empty());
  CHECK(rank_channels({report(0, 0.4)}, 0.4).passing.empty());
  CHECK_THROWS_AS(rank_channels({}), InputError);
}

TEST_CASE("rank_channels returns a permutation") {
  synth::Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<ChannelLooReport> reports;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int c = 0; c < n; ++c) reports.push_back(report(c, std::round(u(rng) * 5) / 5));
    std::shuffle(reports.begin(), reports.end(), rng);
    const double threshold = u(rng);
    const auto r = rank_channels(reports, threshold);
    auto sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (int c = 0; c < n; ++c) CHECK(sorted[static_cast<std::size_t>(c)] == c);
    for (std::size_t i = 1; i < r.order.size(); ++i) {
      const auto risk = [&](ChannelId c) {
        return std::find_if(reports.begin(), reports.end(), [&](auto& x) { return x.channel == c; })->loo_risk;
      };
      const double a = risk(r.order[i - 1]), b = risk(r.order[i]);
      CHECK((a < b || (a == b && r.order[i - 1] < r.order[i])));
    }
    for (ChannelId c : r.passing) {
      CHECK(std::find_if(reports.begin(), reports.end(), [&](auto& x) { return x.channel == c; })->loo_risk <
            threshold);
    }
  }
}

TEST_CASE("signal channel beats noise channel") {
  synth::Rng rng(99);
  const auto blobs = synth::two_blobs(120, 3, 6.0, 1.0, rng);
  FeatureSnapshot s;
  s.labels = blobs.labels;
  s.channels.push_back(synth::gaussian_matrix(120, 3, rng).cast<float>());
  s.channels.push_back(blobs.x.cast<float>());
  NnkConfig c;
  c.k = 15;
  c.kernel = KernelSpec::gaussian_adaptive();
  const auto reports = loo_risk_all_channels(s, c);
  CHECK(reports[1].loo_risk < reports[0].loo_risk);
  CHECK(reports[1].mean_same_class_weight > reports[0].mean_same_class_weight);
  CHECK(rank_channels(reports).order == std::vector<ChannelId>{1, 0});

  const auto m = importance_metrics(reports);
  REQUIRE(m.size() == 2);
  CHECK(m[1].rank_score == reports[1].loo_risk);
  CHECK(m[0].mean_neighbors >= 1.0);
}
