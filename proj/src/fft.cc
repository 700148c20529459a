// rfa/fft.cc

#include "rfa/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>

#include "rfa/error.h"

namespace rfa {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw Error(Errc::kEmptyInput, "fft: zero length");
  std::lock_guard<std::mutex> lock(planner_mutex());
  in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  out_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (in_ == nullptr || out_ == nullptr) throw std::bad_alloc();
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_,
                               reinterpret_cast<fftw_complex*>(out_),
                               FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(in_);
  fftw_free(out_);
}

std::span<const std::complex<double>> RealFft::forward(
    std::span<const double> input) {
  const std::size_t m = std::min(input.size(), n_);
  std::copy_n(input.begin(), m, in_);
  std::fill(in_ + m, in_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_));
  return {out_, n_ / 2 + 1};
}

ComplexFft::ComplexFft(std::size_t n, bool inverse) : n_(n) {
  if (n == 0) throw Error(Errc::kEmptyInput, "fft: zero length");
  std::lock_guard<std::mutex> lock(planner_mutex());
  buf_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * n));
  if (buf_ == nullptr) throw std::bad_alloc();
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), b, b,
                           inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                           FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(buf_);
}

void ComplexFft::execute() { fftw_execute(static_cast<fftw_plan>(plan_)); }

}  // namespace rfa
