#include "residua/forms.hpp"

#include <bit>
#include <stdexcept>

namespace residua {

Form::Form(int n) : n_(n) {
  if (n < 1 || n > 4) throw std::invalid_argument("numeric forms support 1 <= n <= 4");
  c_.assign(std::size_t{1} << (2 * n), Complex(0.0, 0.0));
}

Form Form::scalar(int n, Complex c) {
  Form f(n);
  f.c_[0] = c;
  return f;
}

Form Form::dxbar(int n, int i) {
  Form f(n);
  f.c_.at(std::size_t{1} << (2 * i)) = 1.0;
  return f;
}

Form Form::dx(int n, int i) {
  Form f(n);
  f.c_.at(std::size_t{1} << (2 * i + 1)) = 1.0;
  return f;
}

Form& Form::operator+=(const Form& o) {
  if (o.n_ != n_) throw std::invalid_argument("adding forms on different C^n");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Form operator*(Form a, Complex s) {
  for (auto& v : a.c_) v *= s;
  return a;
}

int wedge_sign(std::uint32_t a, std::uint32_t b) {
  if (a & b) return 0;
  int inversions = 0;
  for (std::uint32_t rest = b; rest; rest &= rest - 1) {
    const std::uint32_t low = rest & (~rest + 1);
    // Generators of a above the generator of b.
    inversions += std::popcount(a & ~((low << 1) - 1));
  }
  return inversions % 2 == 0 ? 1 : -1;
}

Form wedge(const Form& a, const Form& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("wedging forms on different C^n");
  Form out(a.n_);
  for (std::uint32_t x = 0; x < a.c_.size(); ++x) {
    if (a.c_[x] == 0.0) continue;
    for (std::uint32_t y = 0; y < b.c_.size(); ++y) {
      if (b.c_[y] == 0.0 || (x & y)) continue;
      out.c_[x | y] += static_cast<double>(wedge_sign(x, y)) * a.c_[x] * b.c_[y];
    }
  }
  return out;
}

}  // namespace residua
