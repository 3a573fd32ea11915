#include "fft.hpp"

#include <algorithm>
#include <mutex>
#include <new>

namespace corrspec::detail {

namespace {
// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2d::Fft2d(int rows, int cols, int sign) : rows_(rows), cols_(cols) {
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  data_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * count));
  if (data_ == nullptr) throw std::bad_alloc();
  std::lock_guard lock(planner_mutex());
  auto* buf = reinterpret_cast<fftw_complex*>(data_);
  plan_ = fftw_plan_dft_2d(rows, cols, buf, buf, sign, FFTW_ESTIMATE);
}

Fft2d::~Fft2d() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  fftw_free(data_);
}

void Fft2d::fill(std::complex<double> value) {
  std::fill(data_, data_ + static_cast<std::size_t>(rows_) * cols_, value);
}

void Fft2d::execute() { fftw_execute(plan_); }

}  // namespace corrspec::detail
