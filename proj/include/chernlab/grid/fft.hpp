#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include <fftw3.h>

namespace chernlab::detail {

// The FFTW planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Complex-to-complex multidimensional FFT over a fixed shape. Plans are
/// built once (FFTW_ESTIMATE, so deterministic) and shared between copies.
class FftPlan {
 public:
  FftPlan() = default;

  explicit FftPlan(std::vector<int> dims) : dims_(std::move(dims)) {
    size_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                            std::multiplies<>());
    std::lock_guard lock(fftw_planner_mutex());
    auto* buf_in = fftw_alloc_complex(size_);
    auto* buf_out = fftw_alloc_complex(size_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int rank = static_cast<int>(dims_.size());
    auto plans = std::shared_ptr<Plans>(new Plans, [](Plans* p) {
      std::lock_guard inner(fftw_planner_mutex());
      if (p->fwd) fftw_destroy_plan(p->fwd);
      if (p->bwd) fftw_destroy_plan(p->bwd);
      delete p;
    });
    plans->fwd = fftw_plan_dft(rank, dims_.data(), buf_in, buf_out, FFTW_FORWARD, flags);
    plans->bwd = fftw_plan_dft(rank, dims_.data(), buf_in, buf_out, FFTW_BACKWARD, flags);
    fftw_free(buf_in);
    fftw_free(buf_out);
    plans_ = std::move(plans);
  }

  std::size_t size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

  /// Unnormalised forward transform, out-of-place.
  void forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(plans_->fwd, to_fftw(in), reinterpret_cast<fftw_complex*>(out));
  }

  /// Backward transform scaled by 1/size, so backward(forward(u)) == u.
  void backward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(plans_->bwd, to_fftw(in), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] *= scale;
  }

 private:
  struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  // Out-of-place c2c transforms leave their input untouched.
  static fftw_complex* to_fftw(const std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
  }

  std::vector<int> dims_;
  std::size_t size_ = 0;
  std::shared_ptr<Plans> plans_;
};

/// Signed wavenumber of FFT bin i on an n-point axis; the Nyquist bin maps to -n/2.
inline int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

/// Wavenumber used for odd-order derivatives: the Nyquist bin has no
/// real-valued first derivative and is zeroed.
inline int odd_wavenumber(int i, int n) { return (2 * i == n) ? 0 : wavenumber(i, n); }

}  // namespace chernlab::detail
