#pragma once

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "spectral_state.hpp"

namespace twofluid {

namespace detail {
// FFTW planning is not thread safe; execution with new-array calls is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// smallest 2^a 3^b 5^c >= n
inline int smooth_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

/// Padded grid sizes that make quadratic products alias-free for truncation (N1, N2).
inline std::pair<int, int> dealiased_grid(int N1, int N2) {
  const int m1 = smooth_size(std::max(3 * N1 / 2 + 1, 2));
  const int n2 = smooth_size(3 * N2 + 1);
  return {m1, n2};
}

/// Sine/Fourier transforms on a grid with M1 intervals in x1 and n2 points in x2.
/// Grid buffers are complex, (M1+1) rows by n2 columns, row j at x1 = j L1 / M1.
/// Coefficient arrays hold K1 <= M1-1 rows and k2 with 2 K2 + 1 <= n2.
/// Internally x1 is extended to [0, 2 L1) by odd/even reflection and handled by a
/// 2-D complex FFT.
class SineFourierEngine {
 public:
  SineFourierEngine(int M1, int n2, int K1) : M1_(M1), n2_(n2), K1_(K1) {
    if (M1 < 2 || n2 < 1 || K1 < 1 || K1 > M1 - 1)
      throw ResolutionError("grid too coarse for the requested number of sine modes");
    const size_t count = ext_size();
    buf_ = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
    if (!buf_) throw std::bad_alloc();
    std::memset(buf_, 0, sizeof(fftw_complex) * count);

    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(2 * M1, n2, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(2 * M1, n2, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw NumericalError("FFTW plan creation failed");
  }

  ~SineFourierEngine() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  SineFourierEngine(const SineFourierEngine&) = delete;
  SineFourierEngine& operator=(const SineFourierEngine&) = delete;

  int M1() const { return M1_; }
  int n2() const { return n2_; }
  int K1() const { return K1_; }
  size_t grid_size() const { return static_cast<size_t>(M1_ + 1) * n2_; }

  /// grid of sum_k factor(k1,k2) c(k1,k2) sin(k1 pi x1/L1) e^{2 pi i k2 x2/L2}
  template <class Factor>
  void synth_sine(const ModeArray& c, Factor factor, std::vector<cplx>& out) {
    clear();
    load(c, factor, cplx(0.0, -0.5), cplx(0.0, 0.5));
    fftw_execute(bwd_);
    store(out);
  }

  /// same with cos(k1 pi x1 / L1) in place of the sine
  template <class Factor>
  void synth_cos(const ModeArray& c, Factor factor, std::vector<cplx>& out) {
    clear();
    load(c, factor, cplx(0.5), cplx(0.5));
    fftw_execute(bwd_);
    store(out);
  }

  /// grid of a + i b for two real fields given by coefficient arrays; sine_a / sine_b pick the x1 basis
  template <class FactorA, class FactorB>
  void synth_pair(const ModeArray& a, FactorA fa, bool sine_a, const ModeArray& b, FactorB fb, bool sine_b,
                  std::vector<cplx>& out) {
    clear();
    load(a, fa, sine_a ? cplx(0.0, -0.5) : cplx(0.5), sine_a ? cplx(0.0, 0.5) : cplx(0.5));
    load(b, fb, sine_b ? cplx(0.5) : cplx(0.0, 0.5), sine_b ? cplx(-0.5) : cplx(0.0, 0.5));
    fftw_execute(bwd_);
    store(out);
  }

  /// projection of grid = p + i q with p, q real; writes the coefficients of p and q
  void analyze_sine_pair(const std::vector<cplx>& grid, ModeArray& out_p, ModeArray& out_q) {
    analyze_sine(grid, out_p);
    const int K2 = out_p.N2();
    if (out_q.N1() != out_p.N1() || out_q.N2() != K2) out_q = ModeArray(out_p.N1(), K2);
    for (int k1 = 1; k1 <= out_p.N1(); ++k1)
      for (int k2 = 0; k2 <= K2; ++k2) {
        const cplx c = out_p(k1, k2), cm = out_p(k1, -k2);
        const cplx p = 0.5 * (c + std::conj(cm)), q = cplx(0.0, -0.5) * (c - std::conj(cm));
        out_p(k1, k2) = p;
        out_q(k1, k2) = q;
        out_p(k1, -k2) = std::conj(p);
        out_q(k1, -k2) = std::conj(q);
      }
  }

  /// sine/Fourier projection of a grid field onto the modes of `out`
  void analyze_sine(const std::vector<cplx>& grid, ModeArray& out) {
    if (grid.size() != grid_size()) throw ResolutionError("grid size does not match the transform");
    const size_t row_bytes = sizeof(fftw_complex) * n2_;
    std::memset(buf_, 0, row_bytes);
    std::memset(buf_ + static_cast<size_t>(M1_) * n2_, 0, row_bytes);
    for (int j = 1; j < M1_; ++j) {
      const cplx* src = grid.data() + static_cast<size_t>(j) * n2_;
      fftw_complex* a = buf_ + static_cast<size_t>(j) * n2_;
      fftw_complex* b = buf_ + static_cast<size_t>(2 * M1_ - j) * n2_;
      for (int m = 0; m < n2_; ++m) {
        a[m][0] = src[m].real();
        a[m][1] = src[m].imag();
        b[m][0] = -src[m].real();
        b[m][1] = -src[m].imag();
      }
    }
    fftw_execute(fwd_);
    const cplx scale(0.0, 1.0 / (static_cast<double>(M1_) * n2_));
    const int K2 = out.N2();
    const int kmax = std::min(out.N1(), K1_);
    for (int k1 = 1; k1 <= out.N1(); ++k1)
      for (int k2 = -K2; k2 <= K2; ++k2) out(k1, k2) = 0.0;
    for (int k1 = 1; k1 <= kmax; ++k1) {
      const fftw_complex* row = buf_ + static_cast<size_t>(k1) * n2_;
      for (int k2 = -K2; k2 <= K2; ++k2) {
        if (2 * std::abs(k2) >= n2_ && k2 != 0) continue;
        const int m = (k2 % n2_ + n2_) % n2_;
        out(k1, k2) = scale * cplx(row[m][0], row[m][1]);
      }
    }
  }

 private:
  size_t ext_size() const { return static_cast<size_t>(2 * M1_) * n2_; }

  // coefficient w goes to row k1 with weight wp and to row 2 M1 - k1 with weight wm
  template <class Factor>
  void load(const ModeArray& c, Factor factor, cplx wp, cplx wm) {
    const int kmax = std::min(c.N1(), K1_);
    const int K2 = c.N2();
    if (2 * K2 + 1 > n2_) throw ResolutionError("x2 grid too coarse for the truncation");
    for (int k1 = 1; k1 <= kmax; ++k1) {
      fftw_complex* rp = buf_ + static_cast<size_t>(k1) * n2_;
      fftw_complex* rm = buf_ + static_cast<size_t>(2 * M1_ - k1) * n2_;
      for (int k2 = -K2; k2 <= K2; ++k2) {
        const cplx v = c(k1, k2);
        if (v == cplx{}) continue;
        const cplx w = factor(k1, k2) * v;
        const int m = (k2 % n2_ + n2_) % n2_;
        const cplx a = wp * w, b = wm * w;
        rp[m][0] += a.real();
        rp[m][1] += a.imag();
        rm[m][0] += b.real();
        rm[m][1] += b.imag();
      }
    }
  }
  void clear() { std::memset(buf_, 0, sizeof(fftw_complex) * ext_size()); }
  void store(std::vector<cplx>& out) const {
    out.resize(grid_size());
    std::memcpy(static_cast<void*>(out.data()), buf_, sizeof(fftw_complex) * grid_size());
  }

  int M1_, n2_, K1_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

/// Per-thread cache of engines keyed by (M1, n2, K1).
inline SineFourierEngine& engine_for(int M1, int n2, int K1) {
  thread_local std::map<std::tuple<int, int, int>, std::unique_ptr<SineFourierEngine>> cache;
  auto key = std::make_tuple(M1, n2, K1);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<SineFourierEngine>(M1, n2, K1)).first;
  return *it->second;
}

}  // namespace twofluid
