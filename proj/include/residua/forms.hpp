#pragma once

// Numeric exterior algebra on C^n. Generators are ordered dxbar_1, dx_1, ..., dxbar_n, dx_n, so
// a basis monomial is a bitmask with generator 2i for dxbar_i and 2i+1 for dx_i.

#include <complex>
#include <cstdint>
#include <vector>

namespace residua {

using Complex = std::complex<double>;

class Form {
 public:
  explicit Form(int n);
  static Form scalar(int n, Complex c);
  static Form dxbar(int n, int i);
  static Form dx(int n, int i);

  int n() const { return n_; }
  Complex coeff(std::uint32_t mask) const { return c_[mask]; }
  void set(std::uint32_t mask, Complex v) { c_[mask] = v; }
  /// Coefficient of (dxbar_1 ^ dx_1) ^ ... ^ (dxbar_n ^ dx_n).
  Complex top() const { return c_.back(); }

  Form& operator+=(const Form& o);
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator*(Form a, Complex s);
  friend Form wedge(const Form& a, const Form& b);

 private:
  int n_;
  std::vector<Complex> c_;
};

/// (-1)^{#{(a, b) in A x B : a > b}}; 0 when the masks overlap.
int wedge_sign(std::uint32_t a, std::uint32_t b);

/// dxbar ^ dx = 2i dA for one complex variable.
inline constexpr Complex kAreaFactor{0.0, 2.0};

}  // namespace residua
