#include "imethod/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace imethod {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, int points, double length)
    : dim_(dim), points_(points), length_(length), size_(1) {
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(points_);
}

Grid Grid::make(int dim, int points, double length) {
  if (dim < 1 || dim > 4) {
    throw std::invalid_argument("grid dimension must be in 1..4, got " + std::to_string(dim));
  }
  if (points < 8 || !is_power_of_two(points)) {
    throw std::invalid_argument("grid points per axis must be a power of two >= 8, got " +
                                std::to_string(points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("box length must be positive and finite");
  }
  return Grid(dim, points, length);
}

double Grid::cell_volume() const { return std::pow(dx(), dim_); }

double Grid::box_volume() const { return std::pow(length_, dim_); }

double Grid::max_frequency() const { return std::sqrt(static_cast<double>(dim_)) * nyquist(); }

std::vector<int> Grid::unflatten(std::size_t flat) const {
  std::vector<int> idx(dim_);
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::vector<double> Grid::axis_frequencies(int axis) const {
  std::vector<double> out(size_);
  std::size_t stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= points_;
  const double step = frequency_step();
  for (std::size_t i = 0; i < size_; ++i) {
    const int k = wavenumber(static_cast<int>((i / stride) % points_));
    out[i] = step * k;
  }
  return out;
}

std::vector<double> Grid::derivative_frequencies(int axis) const {
  auto out = axis_frequencies(axis);
  const double nyq = -nyquist();
  for (auto& v : out) {
    if (v == nyq) v = 0.0;
  }
  return out;
}

std::vector<double> Grid::radial_frequencies() const {
  std::vector<double> sq(size_, 0.0);
  for (int a = 0; a < dim_; ++a) {
    const auto xi = axis_frequencies(a);
    for (std::size_t i = 0; i < size_; ++i) sq[i] += xi[i] * xi[i];
  }
  for (auto& v : sq) v = std::sqrt(v);
  return sq;
}

Field Field::zeros(const Grid& grid) { return Field{grid, std::vector<complex>(grid.size())}; }

bool Field::all_finite() const {
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

}  // namespace imethod
