#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdecmp/core/time_grid.hpp"

namespace sdecmp {

inline constexpr std::size_t kDefaultChunkSize = 4096;

/// Gaussian Brownian increments, laid out [path][step][coordinate].
///
/// Paths are partitioned into chunks of `chunk_size`; chunk c draws from the
/// Philox stream (seed, c), so the batch is a pure function of
/// (seed, grid, n_paths, dim, chunk_size).
class IncrementBatch {
 public:
  IncrementBatch(TimeGrid grid, std::size_t n_paths, std::size_t dim, std::uint64_t seed,
                 std::size_t chunk_size, std::vector<double> data);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t chunk_size() const { return chunk_size_; }

  /// All increments of one path (n_steps * dim values).
  std::span<const double> path(std::size_t p) const {
    return {data_.data() + p * stride(), stride()};
  }
  /// Increment over [t_k, t_{k+1}] of path p.
  std::span<const double> step(std::size_t p, std::size_t k) const {
    return {data_.data() + p * stride() + k * dim_, dim_};
  }
  double at(std::size_t p, std::size_t k, std::size_t i) const {
    return data_[p * stride() + k * dim_ + i];
  }
  std::span<const double> data() const { return data_; }

  /// Increments of the same Brownian paths on a grid with `factor` times
  /// fewer steps (sums of consecutive increments).
  IncrementBatch coarsened(std::size_t factor) const;
  /// Every increment multiplied by `factor` (noise-scale experiments).
  IncrementBatch scaled(double factor) const;

 private:
  std::size_t stride() const { return grid_.n_steps() * dim_; }

  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t chunk_size_;
  std::vector<double> data_;
};

/// Fills `out` (n_paths_in_chunk * n_steps * dim values) with the draws of
/// chunk `chunk_index`. Shared by batch sampling and streaming estimators.
void fill_chunk_increments(std::uint64_t seed, std::size_t chunk_index, double dt,
                           std::span<double> out);

IncrementBatch sample_increments(const TimeGrid& grid, std::size_t n_paths, std::size_t dim,
                                 std::uint64_t seed, std::size_t chunk_size = kDefaultChunkSize,
                                 std::size_t workers = 1);

/// Element count n_paths * n_values with overflow and size checks.
std::size_t checked_storage(std::size_t n_paths, std::size_t per_path);

}  // namespace sdecmp
