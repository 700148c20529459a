// rfa/fft.h
//
// Thin RAII wrappers over FFTW plans. Plans are created under a global lock
// (the FFTW planner is not thread-safe); execution is lock-free, so one
// object per thread is the intended usage.

#ifndef RFA_FFT_H_
#define RFA_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rfa {

// Forward real-to-complex transform of a fixed length. Input shorter than
// the transform length is zero padded.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  // Returns n/2 + 1 bins; the view is valid until the next call.
  std::span<const std::complex<double>> forward(std::span<const double> input);

 private:
  std::size_t n_;
  double* in_ = nullptr;
  std::complex<double>* out_ = nullptr;
  void* plan_ = nullptr;
};

// In-place complex transform of a fixed length, unnormalized in both
// directions.
class ComplexFft {
 public:
  ComplexFft(std::size_t n, bool inverse);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const { return n_; }
  std::span<std::complex<double>> buffer() { return {buf_, n_}; }
  void execute();

 private:
  std::size_t n_;
  std::complex<double>* buf_ = nullptr;
  void* plan_ = nullptr;
};

}  // namespace rfa

#endif  // RFA_FFT_H_
