#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace pot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64 finalizer; used to derive independent RNG streams from
// (seed, stream tags) so that optional pipeline stages never shift the
// draws of mandatory ones.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix_seed(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  h = mix_seed(h ^ a);
  h = mix_seed(h ^ b);
  h = mix_seed(h ^ c);
  return h;
}

// Stream tags for derive_seed. Keeping them in one table makes collisions
// impossible to introduce by accident.
namespace stream {
constexpr std::uint64_t kAugmentView1 = 1;
constexpr std::uint64_t kAugmentView2 = 2;
constexpr std::uint64_t kPotBatch = 3;
constexpr std::uint64_t kInit = 4;
constexpr std::uint64_t kStudy = 5;
constexpr std::uint64_t kClassifier = 6;
constexpr std::uint64_t kSplit = 7;
}  // namespace stream

// Glorot-uniform matrix, deterministic for a given seed.
Matrix glorot_uniform(int rows, int cols, std::uint64_t seed);

// Number of worker threads: POT_NUM_THREADS if set (>=1), else all cores.
int num_threads();

// Runs fn(i) for i in [0, n). Iterations must write disjoint state; results
// are deterministic regardless of thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

// "%.17g" — round-trips doubles exactly and is byte-stable across reruns.
std::string format_double(double v);

}  // namespace pot
