#include "decoh/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "decoh/error.hpp"

namespace decoh::fft {

namespace {

// Only fftw_execute is thread-safe; planning and destruction are not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

fftw_complex* as_fftw(std::vector<std::complex<double>>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

}  // namespace

void forward_positive_2d(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols) {
  if (data.size() != rows * cols) throw InvalidArgument("fft: array size does not match its shape");
  Plan p;
  {
    std::lock_guard lock(planner_mutex());
    p.plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), as_fftw(data), as_fftw(data),
                              FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!p.plan) throw NumericError("fft: planner failed");
  fftw_execute(p.plan);
}

void transform_axis(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols, int axis,
                    int sign) {
  if (data.size() != rows * cols) throw InvalidArgument("fft: array size does not match its shape");
  const int n = static_cast<int>(axis == 0 ? rows : cols);
  const int howmany = static_cast<int>(axis == 0 ? cols : rows);
  const int stride = axis == 0 ? static_cast<int>(cols) : 1;
  const int dist = axis == 0 ? 1 : static_cast<int>(cols);
  Plan p;
  {
    std::lock_guard lock(planner_mutex());
    p.plan = fftw_plan_many_dft(1, &n, howmany, as_fftw(data), nullptr, stride, dist, as_fftw(data), nullptr,
                                stride, dist, sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!p.plan) throw NumericError("fft: planner failed");
  fftw_execute(p.plan);
}

void transform_1d(std::vector<std::complex<double>>& data, int sign) {
  transform_axis(data, 1, data.size(), 1, sign);
}

}  // namespace decoh::fft
