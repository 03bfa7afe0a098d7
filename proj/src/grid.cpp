#include "grid.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <stdexcept>

namespace detergo::detail {
namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
    if (!data) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftwBuffer() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(data);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* data;
  std::size_t size;
  fftw_plan plan{};
};

constexpr std::size_t kChunk = 512;

}  // namespace

TermPolynomial::TermPolynomial(std::span<const complex> weights,
                               std::span<const std::uint64_t> offsets)
    : weights_(weights), offsets_(offsets) {
  if (weights.size() != offsets.size()) throw std::invalid_argument("term size mismatch");
  contiguous_ = true;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (offsets[k] != k) {
      contiguous_ = false;
      break;
    }
  }
}

complex TermPolynomial::at(TorusPoint x) const {
  CompensatedSum sum;
  if (contiguous_) {
    // Exact anchor every kChunk terms, rotation recurrence in between.
    const complex step = unit(x);
    for (std::size_t start = 0; start < weights_.size(); start += kChunk) {
      complex z = unit(x * static_cast<std::uint64_t>(start));
      const std::size_t end = std::min(weights_.size(), start + kChunk);
      complex block{0.0, 0.0};
      for (std::size_t k = start; k < end; ++k) {
        block += weights_[k] * z;
        z *= step;
      }
      sum.add(block);
    }
  } else {
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      sum.add(weights_[k] * unit(x * offsets_[k]));
    }
  }
  return sum.value();
}

TorusPoint grid_point(std::uint64_t m, std::uint64_t grid, double offset) {
  TorusPoint p = TorusPoint::from_ratio(static_cast<std::int64_t>(m), static_cast<std::int64_t>(grid));
  if (offset != 0.0) p = p + TorusPoint::from_double(offset / static_cast<double>(grid));
  return p;
}

void grid_magnitudes(std::span<const complex> weights, std::span<const std::uint64_t> offsets,
                     std::uint64_t grid, double offset,
                     const std::function<void(std::uint64_t, double)>& visit) {
  const std::uint64_t block = grid <= kMaxBlock ? grid : kMaxBlock;
  if (grid % block != 0) throw std::invalid_argument("grid size must be a multiple of the block");
  const std::uint64_t strides = grid / block;
  FftwBuffer buf(block);
  for (std::uint64_t j = 0; j < strides; ++j) {
    // x_m with m = i * strides + j: fold the twisted weights modulo `block`.
    for (std::size_t i = 0; i < block; ++i) buf.data[i][0] = buf.data[i][1] = 0.0;
    const TorusPoint twist = grid_point(j, grid, offset);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const complex t = weights[k] * unit(twist * offsets[k]);
      auto& slot = buf.data[offsets[k] % block];
      slot[0] += t.real();
      slot[1] += t.imag();
    }
    fftw_execute(buf.plan);
    for (std::size_t i = 0; i < block; ++i) {
      visit(i * strides + j, std::hypot(buf.data[i][0], buf.data[i][1]));
    }
  }
}

}  // namespace detergo::detail
