#include "melcomp/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace melcomp::fft {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n == 0) throw std::invalid_argument("forward_real on empty signal");
  std::vector<double> in(signal.begin(), signal.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> bins, std::size_t n) {
  if (n == 0) throw std::invalid_argument("inverse_real with zero length");
  std::vector<std::complex<double>> in(n / 2 + 1, {0.0, 0.0});
  std::copy_n(bins.begin(), std::min(bins.size(), in.size()), in.begin());
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace melcomp::fft
