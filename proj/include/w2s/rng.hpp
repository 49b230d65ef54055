#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace w2s {

/// Seed for an independent stream, derived from (master seed, stream name, index).
/// Adding a new stream name never changes the draws of existing ones.
std::uint64_t stream_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

class RandomStream {
 public:
  RandomStream(std::uint64_t master, std::string_view stream, std::uint64_t index = 0)
      : engine_(stream_seed(master, stream, index)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0, 1)
  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace w2s
