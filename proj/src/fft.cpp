#include "imethod/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace imethod {

namespace fft {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int points, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, points, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    std::vector<int> shape(dim, points);
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(points);
    auto* scratch = fftw_alloc_complex(total);
    // Executed later on arbitrary (possibly unaligned) std::vector storage.
    fftw_plan plan = fftw_plan_dft(dim, shape.data(), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("fftw_plan_dft failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(int dim, int points, std::span<complex> data, int sign) {
  auto plan = cache().get(dim, points, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void forward(int dim, int points, std::span<complex> data) {
  execute(dim, points, data, FFTW_FORWARD);
}

void backward(int dim, int points, std::span<complex> data) {
  execute(dim, points, data, FFTW_BACKWARD);
}

}  // namespace fft

SpectralField transform_forward(const Field& f) {
  SpectralField out{f.grid, f.values};
  fft::forward(f.grid.dim(), f.grid.points(), out.coeffs);
  const double w = f.grid.cell_volume();
  for (auto& c : out.coeffs) c *= w;
  return out;
}

Field transform_inverse(const SpectralField& F) {
  Field out{F.grid, F.coeffs};
  fft::backward(F.grid.dim(), F.grid.points(), out.values);
  const double w = 1.0 / F.grid.box_volume();
  for (auto& v : out.values) v *= w;
  return out;
}

}  // namespace imethod
