// Times the serial reference kernels against their OpenMP versions and checks
// that both produce identical output.
//
//   vpc_bench [n_rows] [dim] [k] [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <vector>

#include <fmt/core.h>
#include <omp.h>

#include "vpc/kernels.hpp"

namespace
{
template <typename F>
double best_seconds(int repeats, F&& f)
{
  double best = 1e300;
  for (int r = 0; r < repeats; ++r)
  {
    const auto start = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    best = std::min(best, elapsed.count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical)
{
  std::cout << fmt::format("{:<16} serial {:9.4f} s   omp {:9.4f} s   speedup {:5.2f}x   {}\n",
                           name, serial, parallel, serial / parallel,
                           identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv)
{
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
  const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 256;
  const std::size_t k = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 64;
  const int repeats = argc > 4 ? std::atoi(argv[4]) : 3;

  std::mt19937_64 rng(1);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> values(n * dim);
  for (auto& v : values)
  {
    v = normal(rng);
  }
  const vpc::FeatureMatrix features(n, dim, std::move(values));
  std::vector<double> centroids(k * dim);
  for (auto& v : centroids)
  {
    v = normal(rng);
  }

  std::cout << fmt::format("n={} dim={} k={} threads={}\n", n, dim, k, omp_get_max_threads());

  {
    std::vector<std::uint32_t> ls(n), lp(n);
    std::vector<double> ds(n), dp(n);
    const double ts = best_seconds(repeats, [&] {
      vpc::serial::assign_nearest(features, centroids, k, ls, ds);
    });
    const double tp = best_seconds(repeats, [&] {
      vpc::parallel::assign_nearest(features, centroids, k, lp, dp);
    });
    report("assign_nearest", ts, tp, ls == lp && ds == dp);
  }
  {
    const std::size_t top = std::min<std::size_t>(5, k);
    std::vector<std::uint32_t> rs(n * top), rp(n * top);
    const double ts = best_seconds(repeats, [&] {
      vpc::serial::rank_centroids(features, centroids, k, top, rs);
    });
    const double tp = best_seconds(repeats, [&] {
      vpc::parallel::rank_centroids(features, centroids, k, top, rp);
    });
    report("rank_centroids", ts, tp, rs == rp);
  }
  {
    const std::size_t m = std::min<std::size_t>(n, 5000);
    std::uniform_real_distribution<double> coord(-500.0, 500.0);
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    std::vector<vpc::Pose> queries, refs;
    std::vector<vpc::SampleId> ids;
    for (std::size_t i = 0; i < m; ++i)
    {
      queries.emplace_back(coord(rng), coord(rng), angle(rng));
      refs.emplace_back(coord(rng), coord(rng), angle(rng));
      ids.push_back(i);
    }
    std::vector<vpc::PoseMatch> ms(m), mp(m);
    const double limit = vpc::deg_to_rad(20.0);
    const double ts = best_seconds(repeats, [&] {
      vpc::serial::match_poses(queries, refs, ids, limit, ms);
    });
    const double tp = best_seconds(repeats, [&] {
      vpc::parallel::match_poses(queries, refs, ids, limit, mp);
    });
    bool same = true;
    for (std::size_t i = 0; i < m; ++i)
    {
      same = same && ms[i].index == mp[i].index && ms[i].distance == mp[i].distance;
    }
    report("match_poses", ts, tp, same);
  }
  return 0;
}
