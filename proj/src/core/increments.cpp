#include "sdecmp/core/increments.hpp"

#include <cmath>
#include <limits>
#include <new>
#include <random>
#include <string>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"

namespace sdecmp {

namespace {
// 2^33 doubles (64 GiB) is far beyond any desk-scale experiment.
constexpr std::size_t kMaxElements = std::size_t{1} << 33;
}  // namespace

std::size_t checked_storage(std::size_t n_paths, std::size_t per_path) {
  if (per_path != 0 && n_paths > std::numeric_limits<std::size_t>::max() / per_path) {
    throw ResourceError("requested path storage overflows size_t");
  }
  const std::size_t total = n_paths * per_path;
  if (total > kMaxElements) {
    throw ResourceError("requested path storage of " + std::to_string(total) +
                        " values exceeds the supported maximum");
  }
  return total;
}

IncrementBatch::IncrementBatch(TimeGrid grid, std::size_t n_paths, std::size_t dim,
                               std::uint64_t seed, std::size_t chunk_size,
                               std::vector<double> data)
    : grid_(grid),
      n_paths_(n_paths),
      dim_(dim),
      seed_(seed),
      chunk_size_(chunk_size),
      data_(std::move(data)) {
  if (data_.size() != n_paths_ * grid_.n_steps() * dim_) {
    throw InputError("increment batch: data size does not match shape");
  }
}

IncrementBatch IncrementBatch::coarsened(std::size_t factor) const {
  const TimeGrid coarse = grid_.coarsened(factor);
  const std::size_t coarse_stride = coarse.n_steps() * dim_;
  std::vector<double> out(n_paths_ * coarse_stride, 0.0);
  for (std::size_t p = 0; p < n_paths_; ++p) {
    for (std::size_t k = 0; k < coarse.n_steps(); ++k) {
      for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < factor; ++j) s += at(p, k * factor + j, i);
        out[p * coarse_stride + k * dim_ + i] = s;
      }
    }
  }
  return IncrementBatch(coarse, n_paths_, dim_, seed_, chunk_size_, std::move(out));
}

IncrementBatch IncrementBatch::scaled(double factor) const {
  std::vector<double> out(data_);
  for (double& x : out) x *= factor;
  return IncrementBatch(grid_, n_paths_, dim_, seed_, chunk_size_, std::move(out));
}

void fill_chunk_increments(std::uint64_t seed, std::size_t chunk_index, double dt,
                           std::span<double> out) {
  Philox4x32 engine(seed, chunk_index);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (double& x : out) x = normal(engine);
}

IncrementBatch sample_increments(const TimeGrid& grid, std::size_t n_paths, std::size_t dim,
                                 std::uint64_t seed, std::size_t chunk_size,
                                 std::size_t workers) {
  if (n_paths == 0 || dim == 0) throw ConfigError("sample_increments: counts must be positive");
  if (chunk_size == 0) throw ConfigError("sample_increments: chunk size must be positive");
  const std::size_t per_path = grid.n_steps() * dim;
  const std::size_t total = checked_storage(n_paths, per_path);
  std::vector<double> data;
  try {
    data.resize(total);
  } catch (const std::bad_alloc&) {
    throw ResourceError("sample_increments: cannot allocate " + std::to_string(total) + " values");
  }
  for_each_chunk(n_paths, chunk_size, workers,
                 [&](std::size_t begin, std::size_t end, std::size_t chunk) {
                   fill_chunk_increments(
                       seed, chunk, grid.dt(),
                       std::span<double>(data.data() + begin * per_path, (end - begin) * per_path));
                 });
  return IncrementBatch(grid, n_paths, dim, seed, chunk_size, std::move(data));
}

}  // namespace sdecmp
