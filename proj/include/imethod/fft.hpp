#pragma once

#include <span>

#include "imethod/grid.hpp"

namespace imethod {

/// Unnormalized in-place DFT over a G^n cube (FFTW backend).
///
/// Plans are created once per (dim, points, direction) with FFTW_ESTIMATE so
/// the same input always produces the same output bits. Safe to call from
/// several threads.
namespace fft {

void forward(int dim, int points, std::span<complex> data);   // sign -1
void backward(int dim, int points, std::span<complex> data);  // sign +1, no 1/G^n

}  // namespace fft

/// u -> u_hat with u_hat(xi_k) = dx^n sum_x u(x) exp(-i xi_k . x).
SpectralField transform_forward(const Field& f);
/// u_hat -> u with u(x) = L^-n sum_k u_hat(xi_k) exp(i xi_k . x).
Field transform_inverse(const SpectralField& F);

}  // namespace imethod
