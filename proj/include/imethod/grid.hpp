#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace imethod {

using complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Periodic box [0, L)^n sampled with G points per axis.
///
/// Sample i along an axis sits at x = i * dx. The dual lattice along an axis
/// is xi_k = (2 pi / L) k for k in {-G/2, ..., G/2 - 1}; storage index i maps
/// to k = i for i < G/2 and k = i - G otherwise (FFT order).
class Grid {
 public:
  /// Throws std::invalid_argument unless dim is 1..4, points is a power of
  /// two >= 8 and length > 0.
  static Grid make(int dim, int points, double length);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double length() const { return length_; }
  double dx() const { return length_ / points_; }

  /// G^n
  std::size_t size() const { return size_; }

  double cell_volume() const;  // dx^n
  double box_volume() const;   // L^n

  double frequency_step() const { return 2.0 * kPi / length_; }
  /// pi G / L, the magnitude assigned to the unpaired mode -G/2.
  double nyquist() const { return kPi * points_ / length_; }
  /// Largest |xi| on the lattice: sqrt(n) * nyquist.
  double max_frequency() const;

  int wavenumber(int axis_index) const {
    return axis_index < points_ / 2 ? axis_index : axis_index - points_;
  }
  double coordinate(int axis_index) const { return axis_index * dx(); }

  /// Row-major multi-index of a flat index, last axis fastest.
  std::vector<int> unflatten(std::size_t flat) const;

  /// |xi| for every flat index, in storage order.
  std::vector<double> radial_frequencies() const;
  /// xi_axis for every flat index.
  std::vector<double> axis_frequencies(int axis) const;
  /// axis_frequencies with the unpaired -G/2 mode zeroed, so first
  /// derivatives of real fields stay real.
  std::vector<double> derivative_frequencies(int axis) const;

  bool operator==(const Grid& other) const = default;

 private:
  Grid(int dim, int points, double length);

  int dim_;
  int points_;
  double length_;
  std::size_t size_;
};

/// Complex samples of a function on a Grid at a fixed time.
struct Field {
  Grid grid;
  std::vector<complex> values;

  static Field zeros(const Grid& grid);

  bool all_finite() const;
};

/// Fourier coefficients of a Field, stored in FFT order (see Grid).
struct SpectralField {
  Grid grid;
  std::vector<complex> coeffs;
};

/// Real vector field with one component array per axis.
struct VectorField {
  Grid grid;
  std::vector<std::vector<double>> components;
};

}  // namespace imethod
