#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "domain.hpp"
#include "mat2.hpp"

namespace twofluid {

/// Scalar field coefficients on the sine/Fourier basis:
/// k1 in 1..N1, k2 in -N2..N2, dense storage.
class ModeArray {
 public:
  ModeArray() = default;
  ModeArray(int N1, int N2) : N1_(N1), N2_(N2), c_(static_cast<size_t>(N1) * (2 * N2 + 1)) {
    if (N1 < 1 || N2 < 0) throw PreconditionError("truncation orders must satisfy N1 >= 1, N2 >= 0");
  }

  int N1() const { return N1_; }
  int N2() const { return N2_; }
  int width() const { return 2 * N2_ + 1; }
  size_t size() const { return c_.size(); }

  bool contains(int k1, int k2) const { return k1 >= 1 && k1 <= N1_ && k2 >= -N2_ && k2 <= N2_; }

  cplx& operator()(int k1, int k2) { return c_[idx(k1, k2)]; }
  const cplx& operator()(int k1, int k2) const { return c_[idx(k1, k2)]; }
  cplx get(int k1, int k2) const { return contains(k1, k2) ? c_[idx(k1, k2)] : cplx{}; }

  std::vector<cplx>& raw() { return c_; }
  const std::vector<cplx>& raw() const { return c_; }

 private:
  size_t idx(int k1, int k2) const { return static_cast<size_t>(k1 - 1) * width() + (k2 + N2_); }
  int N1_ = 0, N2_ = 0;
  std::vector<cplx> c_;
};

/// Coefficients of (u1, u2). component 0 is u1, component 1 is u2.
/// A "complexified" state drops the conjugate-pair constraint; it is used by
/// the normal-form oracle where a mode and its conjugate are independent.
class SpectralState {
 public:
  SpectralState() = default;
  SpectralState(int N1, int N2, bool complexified = false)
      : comp_{ModeArray(N1, N2), ModeArray(N1, N2)}, complexified_(complexified) {}

  int N1() const { return comp_[0].N1(); }
  int N2() const { return comp_[0].N2(); }
  bool complexified() const { return complexified_; }
  void set_complexified(bool c) { complexified_ = c; }

  ModeArray& component(int l) { return comp_[l]; }
  const ModeArray& component(int l) const { return comp_[l]; }

  cplx& at(int k1, int k2, int l) { return comp_[l](k1, k2); }
  const cplx& at(int k1, int k2, int l) const { return comp_[l](k1, k2); }

  Vec2 mode(int k1, int k2) const { return {comp_[0](k1, k2), comp_[1](k1, k2)}; }
  void set_mode(int k1, int k2, const Vec2& v) {
    comp_[0](k1, k2) = v[0];
    comp_[1](k1, k2) = v[1];
  }

  /// symmetrize conjugate pairs; no-op for complexified states
  void enforce_reality() {
    if (complexified_) return;
    for (auto& a : comp_) {
      for (int k1 = 1; k1 <= a.N1(); ++k1) {
        a(k1, 0) = a(k1, 0).real();
        for (int k2 = 1; k2 <= a.N2(); ++k2) {
          const cplx avg = 0.5 * (a(k1, k2) + std::conj(a(k1, -k2)));
          a(k1, k2) = avg;
          a(k1, -k2) = std::conj(avg);
        }
      }
    }
  }

  /// max |c(k1,k2) - conj c(k1,-k2)| over all pairs
  double reality_residual() const {
    double r = 0.0;
    for (const auto& a : comp_)
      for (int k1 = 1; k1 <= a.N1(); ++k1)
        for (int k2 = 0; k2 <= a.N2(); ++k2) r = std::max(r, std::abs(a(k1, k2) - std::conj(a(k1, -k2))));
    return r;
  }

  /// coefficients of the pointwise complex conjugate field
  SpectralState conjugate() const {
    SpectralState out(N1(), N2(), complexified_);
    for (int l = 0; l < 2; ++l)
      for (int k1 = 1; k1 <= N1(); ++k1)
        for (int k2 = -N2(); k2 <= N2(); ++k2) out.at(k1, k2, l) = std::conj(at(k1, -k2, l));
    return out;
  }

  /// sum of |c|^2 over both components
  double coeff_norm_sq() const {
    double s = 0.0;
    for (const auto& a : comp_)
      for (const auto& v : a.raw()) s += std::norm(v);
    return s;
  }
  double max_abs() const {
    double s = 0.0;
    for (const auto& a : comp_)
      for (const auto& v : a.raw()) s = std::max(s, std::abs(v));
    return s;
  }

  /// copy into a different truncation (extra modes zero, dropped modes lost)
  SpectralState resized(int N1, int N2) const {
    SpectralState out(N1, N2, complexified_);
    for (int l = 0; l < 2; ++l)
      for (int k1 = 1; k1 <= std::min(N1, this->N1()); ++k1)
        for (int k2 = -std::min(N2, this->N2()); k2 <= std::min(N2, this->N2()); ++k2)
          out.at(k1, k2, l) = at(k1, k2, l);
    return out;
  }

  SpectralState& operator+=(const SpectralState& o) {
    check_same(o);
    for (int l = 0; l < 2; ++l)
      for (size_t i = 0; i < comp_[l].size(); ++i) comp_[l].raw()[i] += o.comp_[l].raw()[i];
    return *this;
  }
  SpectralState& operator-=(const SpectralState& o) {
    check_same(o);
    for (int l = 0; l < 2; ++l)
      for (size_t i = 0; i < comp_[l].size(); ++i) comp_[l].raw()[i] -= o.comp_[l].raw()[i];
    return *this;
  }
  SpectralState& operator*=(cplx s) {
    for (auto& a : comp_)
      for (auto& v : a.raw()) v *= s;
    return *this;
  }
  friend SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }
  friend SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
  friend SpectralState operator*(cplx s, SpectralState a) { return a *= s; }

 private:
  void check_same(const SpectralState& o) const {
    if (o.N1() != N1() || o.N2() != N2()) throw PreconditionError("spectral states with different truncation");
  }
  std::array<ModeArray, 2> comp_;
  bool complexified_ = false;
};

/// Real samples on x1 = j L1/n1 (j = 0..n1), x2 = m L2/n2 (m = 0..n2-1).
struct ScalarGrid {
  int n1 = 0, n2 = 0;
  std::vector<double> v;  // (n1+1) * n2, row j contiguous

  ScalarGrid() = default;
  ScalarGrid(int n1_, int n2_) : n1(n1_), n2(n2_), v(static_cast<size_t>(n1_ + 1) * n2_, 0.0) {}
  double& operator()(int j, int m) { return v[static_cast<size_t>(j) * n2 + m]; }
  double operator()(int j, int m) const { return v[static_cast<size_t>(j) * n2 + m]; }
  double max_abs() const {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  }
};

/// Two real components on a common grid: (u1, u2) or a vector field such as E.
struct GridPair {
  ScalarGrid first, second;
  GridPair() = default;
  GridPair(int n1, int n2) : first(n1, n2), second(n1, n2) {}
  int n1() const { return first.n1; }
  int n2() const { return first.n2; }
};

using GridField = GridPair;        // (u1, u2)
using VectorGridField = GridPair;  // (E1, E2), (d1 u, d2 u), ...

}  // namespace twofluid
