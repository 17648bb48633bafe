#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hypermerw {

/// Row-major dense order-k tensor over n nodes. Only meant for tiny
/// instances (tests, oracle); construction refuses more than 2^20 cells.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(int order, std::size_t dim);

  int order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(std::span<const std::uint32_t> index) { return data_[flat_index(index)]; }
  double at(std::span<const std::uint32_t> index) const { return data_[flat_index(index)]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::size_t flat_index(std::span<const std::uint32_t> index) const;
  std::vector<std::uint32_t> multi_index(std::size_t flat) const;

 private:
  int order_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace hypermerw
