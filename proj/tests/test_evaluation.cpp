#include <doctest.h>

#include <numeric>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vpc/evaluation.hpp"

using namespace vpc;

namespace
{
TrajectorySample at(SampleId id, double x, double y, double heading_deg)
{
  return {id, static_cast<double>(id), Pose(x, y, deg_to_rad(heading_deg))};
}

std::vector<GroundTruthLabel> labels(const std::vector<std::optional<ClassId>>& classes)
{
  std::vector<GroundTruthLabel> out;
  for (std::size_t i = 0; i < classes.size(); ++i)
  {
    GroundTruthLabel gt;
    gt.test_sample_id = i;
    gt.label = classes[i];
    out.push_back(gt);
  }
  return out;
}

std::vector<TopXPrediction> predictions(const std::vector<std::vector<ClassId>>& ranked)
{
  std::vector<TopXPrediction> out;
  for (std::size_t i = 0; i < ranked.size(); ++i)
  {
    out.push_back({i, ranked[i]});
  }
  return out;
}

CentroidModel model_with_counts(std::vector<std::size_t> counts)
{
  CentroidModel m;
  m.dim = 1;
  m.centroids.assign(counts.size(), 0.0);
  m.counts = std::move(counts);
  return m;
}
}  // namespace

TEST_SUITE("evaluation")
{
  TEST_CASE("ground truth: exact revisit")
  {
    const Trajectory train({at(0, 0, 0, 0), at(1, 5, 5, 90)});
    const Trajectory test({at(0, 5, 5, 90)});
    const Partition p({0, 1}, {0, 1});
    const auto gt = assign_ground_truth(test, train, p);
    REQUIRE(gt[0].valid());
    CHECK(*gt[0].label == 1);
    CHECK(*gt[0].match_distance == 0.0);
    CHECK(*gt[0].matched_train_id == 1);
  }

  TEST_CASE("ground truth: orientation filter before nearest location")
  {
    const Trajectory test({at(0, 0, 0, 0)});
    // A (class 3) at 1 m, heading 5 deg; B (class 7) at 0.5 m, heading 30 deg.
    // Far-away filler samples keep the 8 class ids dense.
    std::vector<TrajectorySample> train_samples{at(0, 1, 0, 5), at(1, 0.5, 0, 30)};
    std::vector<SampleId> ids{0, 1};
    std::vector<ClassId> cls{3, 7};
    for (ClassId c = 0; c < 8; ++c)
    {
      if (c == 3 || c == 7)
      {
        continue;
      }
      const SampleId id = 100 + c;
      train_samples.push_back(at(id, 1000, 1000, 0));
      ids.push_back(id);
      cls.push_back(c);
    }
    const Trajectory full_train(train_samples);
    const Partition full(ids, cls);
    const auto gt = assign_ground_truth(test, full_train, full);
    REQUIRE(gt[0].valid());
    CHECK(*gt[0].label == 3);
    CHECK(*gt[0].matched_train_id == 0);
  }

  TEST_CASE("ground truth: nearest compatible sample beyond the distance threshold")
  {
    const Trajectory train({at(0, 25, 0, 0)});
    const Trajectory test({at(0, 0, 0, 0)});
    const auto gt = assign_ground_truth(test, train, Partition({0}, {0}));
    CHECK_FALSE(gt[0].valid());
  }

  TEST_CASE("ground truth: threshold boundaries are inclusive")
  {
    const Partition p({0}, {0});
    const Trajectory test({at(0, 0, 0, 0)});
    CHECK(assign_ground_truth(test, Trajectory({at(0, 1, 0, 19.9)}), p)[0].valid());
    CHECK_FALSE(assign_ground_truth(test, Trajectory({at(0, 1, 0, 20.1)}), p)[0].valid());
    CHECK(assign_ground_truth(test, Trajectory({at(0, 17.9, 0, 0)}), p)[0].valid());
    CHECK_FALSE(assign_ground_truth(test, Trajectory({at(0, 18.1, 0, 0)}), p)[0].valid());
    CHECK(assign_ground_truth(test, Trajectory({at(0, 18.0, 0, 0)}), p)[0].valid());
  }

  TEST_CASE("ground truth: equidistant candidates go to the lower sample id")
  {
    const Trajectory train({at(9, 1, 0, 0), at(4, -1, 0, 0)});
    const Trajectory test({at(0, 0, 0, 0)});
    const auto gt = assign_ground_truth(test, train, Partition({9, 4}, {0, 1}));
    CHECK(*gt[0].matched_train_id == 4);
  }

  TEST_CASE("ground truth with open thresholds is plain nearest neighbour")
  {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> coord(-100, 100);
    std::uniform_real_distribution<double> heading(-180, 180);
    std::vector<TrajectorySample> train;
    std::vector<Pose> train_poses;
    std::vector<ClassId> cls;
    for (std::size_t i = 0; i < 300; ++i)
    {
      train.push_back(at(i, coord(rng), coord(rng), heading(rng)));
      train_poses.push_back(train.back().pose);
      cls.push_back(static_cast<ClassId>(i % 17));
    }
    std::vector<TrajectorySample> test;
    for (std::size_t i = 0; i < 200; ++i)
    {
      test.push_back(at(i, coord(rng), coord(rng), heading(rng)));
    }
    std::vector<SampleId> ids(300);
    std::iota(ids.begin(), ids.end(), 0);
    const Partition p(ids, cls);
    const GroundTruthThresholds open{180.0, std::numeric_limits<double>::infinity()};
    const auto gt = assign_ground_truth(Trajectory(test), Trajectory(train), p, open);
    for (std::size_t i = 0; i < test.size(); ++i)
    {
      const std::size_t want =
          oracle::nearest_position(test[i].pose.x(), test[i].pose.y(), train_poses);
      REQUIRE(gt[i].valid());
      CHECK(*gt[i].matched_train_id == want);
      CHECK(*gt[i].label == cls[want]);
    }
  }

  TEST_CASE("ground truth requires a training trajectory")
  {
    CHECK_THROWS_AS(assign_ground_truth(Trajectory({at(0, 0, 0, 0)}), Trajectory(), Partition()),
                    std::invalid_argument);
  }

  TEST_CASE("centroid model examples")
  {
    const auto one = train_centroid_model(FeatureMatrix(2, 2, {0, 0, 2, 2}), Partition({0, 1}, {0, 0}));
    CHECK(one.centroids == std::vector<double>{1.0, 1.0});
    CHECK(one.counts == std::vector<std::size_t>{2});

    const FeatureMatrix rows(3, 2, {1, 2, 3, 4, 5, 6});
    const auto single = train_centroid_model(rows, Partition({0, 1, 2}, {0, 1, 2}));
    CHECK(single.centroids == std::vector<double>{1, 2, 3, 4, 5, 6});

    CHECK_THROWS_AS(train_centroid_model(rows, Partition({0, 1}, {0, 1})), std::invalid_argument);
  }

  TEST_CASE("centroid model matches naive accumulation, seed 3")
  {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<float> values(50 * 8);
    for (auto& v : values)
    {
      v = static_cast<float>(g(rng));
    }
    std::vector<SampleId> ids(50);
    std::vector<ClassId> cls(50);
    for (std::size_t i = 0; i < 50; ++i)
    {
      ids[i] = i;
      cls[i] = static_cast<ClassId>(i < 5 ? i : rng() % 5);
    }
    const FeatureMatrix m(50, 8, values);
    const auto model = train_centroid_model(m, Partition(ids, cls));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < 50; ++i)
    {
      rows.emplace_back(m.row(i).begin(), m.row(i).end());
    }
    const auto want = oracle::class_means(rows, cls, 5);
    std::size_t total = 0;
    for (std::size_t c = 0; c < 5; ++c)
    {
      total += model.counts[c];
      for (std::size_t d = 0; d < 8; ++d)
      {
        CHECK(std::fabs(model.centroid(c)[d] - want[c][d]) <= 1e-12);
      }
    }
    CHECK(total == 50);
  }

  TEST_CASE("classify top-X examples")
  {
    CentroidModel m;
    m.dim = 1;
    m.centroids = {0.0, 1.0, 5.0};
    m.counts = {1, 1, 1};
    const std::vector<float> q{0.6f};
    CHECK(classify_top_x(m, q, 2).ranked_classes == std::vector<ClassId>{1, 0});
    CHECK(classify_top_x(m, q, 10).ranked_classes == std::vector<ClassId>{1, 0, 2});

    CentroidModel five;
    five.dim = 2;
    five.centroids = {9, 9, 8, 8, 7, 7, 6, 6, 0.5, -1};
    five.counts = {1, 1, 1, 1, 1};
    const std::vector<float> exact{0.5f, -1.0f};
    CHECK(classify_top_x(five, exact, 1).ranked_classes == std::vector<ClassId>{4});

    CentroidModel tie;
    tie.dim = 1;
    tie.centroids = {1.0, -1.0};
    tie.counts = {1, 1};
    const std::vector<float> zero{0.0f};
    CHECK(classify_top_x(tie, zero, 2).ranked_classes == std::vector<ClassId>{0, 1});

    const std::vector<float> wrong_dim{0.0f, 1.0f};
    CHECK_THROWS(classify_top_x(m, wrong_dim, 1));
    CHECK_THROWS(classify_top_x(m, q, 0));
  }

  TEST_CASE("classification is invariant under a common translation")
  {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> v(-20, 20);
    for (int trial = 0; trial < 50; ++trial)
    {
      CentroidModel a;
      a.dim = 3;
      for (int i = 0; i < 7 * 3; ++i)
      {
        a.centroids.push_back(v(rng));
      }
      a.counts.assign(7, 1);
      CentroidModel b = a;
      const std::vector<double> shift{static_cast<double>(v(rng)), static_cast<double>(v(rng)),
                                      static_cast<double>(v(rng))};
      for (std::size_t i = 0; i < b.centroids.size(); ++i)
      {
        b.centroids[i] += shift[i % 3];
      }
      std::vector<float> q(3);
      std::vector<float> q_shift(3);
      for (std::size_t d = 0; d < 3; ++d)
      {
        q[d] = static_cast<float>(v(rng));
        q_shift[d] = static_cast<float>(q[d] + shift[d]);
      }
      CHECK(classify_top_x(a, q, 7).ranked_classes == classify_top_x(b, q_shift, 7).ranked_classes);
    }
  }

  TEST_CASE("success rate examples")
  {
    const auto gts = labels({2, 5, 9});
    const auto r = success_rate(predictions({{2}, {4}, {9}}), gts);
    CHECK(r.exact == Rational(2, 3));
    CHECK(r.n_valid == 3);
    CHECK(success_rate(predictions({{2}, {5}, {9}}), gts).value == 1.0);

    const auto with_invalid = labels({1, std::nullopt, 0});
    const auto partial = success_rate(predictions({{0, 1}, {1, 0}, {1, 0}}), with_invalid);
    CHECK(partial.exact == 1);
    CHECK(partial.n_valid == 2);

    const auto none = success_rate(predictions({{0}}), labels({std::nullopt}));
    CHECK(none.no_valid_tests);
    CHECK(none.value == 0.0);

    auto misaligned = predictions({{2}, {5}, {9}});
    misaligned[1].test_sample_id = 42;
    CHECK_THROWS(success_rate(misaligned, gts));
  }

  TEST_CASE("normalized success rate examples")
  {
    const auto r = normalized_success_rate(predictions({{0}, {2}}), labels({0, 1}),
                                           model_with_counts({4, 1, 1}));
    CHECK(r.exact == Rational(1, 8));
    CHECK(r.value == 0.125);

    const std::size_t n_train = 37;
    const auto collapsed = normalized_success_rate(predictions({{0}, {0}, {0}}), labels({0, 0, 0}),
                                                   model_with_counts({n_train}));
    CHECK(collapsed.exact == Rational(1, 37));

    const auto singletons = normalized_success_rate(predictions({{0}, {1}, {2}}),
                                                    labels({0, 1, 2}), model_with_counts({1, 1, 1}));
    CHECK(singletons.value == 1.0);
    CHECK(singletons.value == success_rate(predictions({{0}, {1}, {2}}), labels({0, 1, 2})).value);

    CHECK_THROWS(normalized_success_rate(predictions({{0, 1}}), labels({0}),
                                         model_with_counts({1, 1})));
    CHECK_THROWS(normalized_success_rate(predictions({{1}}), labels({1}),
                                         model_with_counts({1, 0})));
  }

  TEST_CASE("metric identities against rational oracles")
  {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial)
    {
      const std::size_t n_classes = 1 + rng() % 12;
      const std::size_t n = 1 + rng() % 80;
      std::vector<std::size_t> sizes(n_classes);
      for (auto& s : sizes)
      {
        s = 1 + rng() % 9;
      }
      std::vector<std::optional<ClassId>> truth(n);
      std::vector<std::vector<ClassId>> ranked(n);
      for (std::size_t i = 0; i < n; ++i)
      {
        if (rng() % 5 != 0)
        {
          truth[i] = static_cast<ClassId>(rng() % n_classes);
        }
        std::vector<ClassId> order(n_classes);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(std::min<std::size_t>(5, n_classes));
        ranked[i] = order;
      }
      std::vector<std::vector<ClassId>> top1;
      std::vector<ClassId> first;
      for (const auto& r : ranked)
      {
        top1.push_back({r.front()});
        first.push_back(r.front());
      }
      const auto gts = labels(truth);
      const auto sr1 = success_rate(predictions(top1), gts);
      const auto sr5 = success_rate(predictions(ranked), gts);
      const auto nsr = normalized_success_rate(predictions(top1), gts, model_with_counts(sizes));
      CHECK(sr1.exact == oracle::success_rate(truth, top1));
      CHECK(sr5.exact == oracle::success_rate(truth, ranked));
      CHECK(nsr.exact == oracle::normalized_success_rate(truth, first, sizes));
      CHECK(nsr.exact <= sr1.exact);
      CHECK(sr1.exact <= sr5.exact);
      CHECK(nsr.value <= sr1.value);
      CHECK(sr1.value <= sr5.value);
    }
  }

  TEST_CASE("success rate is invariant under relabelling")
  {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 30; ++trial)
    {
      const std::size_t k = 2 + rng() % 10;
      std::vector<ClassId> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::optional<ClassId>> truth;
      std::vector<std::optional<ClassId>> truth_p;
      std::vector<std::vector<ClassId>> ranked;
      std::vector<std::vector<ClassId>> ranked_p;
      for (int i = 0; i < 40; ++i)
      {
        const ClassId t = static_cast<ClassId>(rng() % k);
        const ClassId r = static_cast<ClassId>(rng() % k);
        truth.push_back(t);
        truth_p.push_back(perm[t]);
        ranked.push_back({r});
        ranked_p.push_back({perm[r]});
      }
      CHECK(success_rate(predictions(ranked), labels(truth)).exact ==
            success_rate(predictions(ranked_p), labels(truth_p)).exact);
    }
  }

  TEST_CASE("evaluate on a separable world")
  {
    const Trajectory train({at(0, 0, 0, 0), at(1, 1, 0, 0), at(2, 50, 0, 0), at(3, 51, 0, 0)});
    const FeatureMatrix train_f(4, 1, {0, 0, 10, 10});
    const Trajectory test({at(0, 0.5, 0, 0), at(1, 50.5, 0, 0), at(2, 500, 0, 0)});
    const FeatureMatrix test_f(3, 1, {0, 10, 10});
    const auto report = evaluate(train, train_f, Partition({0, 1, 2, 3}, {0, 0, 1, 1}), test, test_f);
    CHECK(report.n_valid_tests == 2);
    CHECK(report.n_invalid_tests == 1);
    CHECK(report.sr_top1 == 1.0);
    CHECK(report.sr_top5 == 1.0);
    CHECK(report.nsr_top1 == 0.5);
    CHECK(report.n_classes == 2);
    CHECK(report.mean_class_size == 2.0);
    REQUIRE(report.class_size_histogram.size() == 1);
    CHECK(report.class_size_histogram[0] == std::pair<std::size_t, std::size_t>{2, 2});
    CHECK(report.config["orient_thresh_deg"] == 20.0);
    CHECK(report.config["dist_thresh_m"] == 18.0);
    CHECK(report.config["top"] == 5);
  }
}
