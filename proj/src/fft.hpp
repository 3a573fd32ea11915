#pragma once

#include <complex>
#include <memory>

#include <fftw3.h>

namespace corrspec::detail {

/// In-place complex 2-D DFT over a row-major rows x cols buffer.
/// sign = FFTW_FORWARD computes sum x e^{-2 pi i (...)}, FFTW_BACKWARD the e^{+} sum (unnormalized).
class Fft2d {
 public:
  Fft2d(int rows, int cols, int sign);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::complex<double>& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::complex<double>& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  void fill(std::complex<double> value);
  void execute();

 private:
  int rows_;
  int cols_;
  std::complex<double>* data_;
  fftw_plan plan_;
};

}  // namespace corrspec::detail
