#pragma once

#include <cstdint>
#include <vector>

namespace ateml {

// Counter-based generator: the n-th draw of a stream is a pure function of
// (key, n), so streams can be split off deterministically without any shared
// state. Every random decision in the library flows from one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double normal();                       // N(0, 1), Box-Muller
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)
  bool bernoulli(double p) { return uniform() < p; }

  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ateml
