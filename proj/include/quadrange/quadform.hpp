#pragma once

#include <span>
#include <vector>

#include "quadrange/matrix.hpp"

namespace quadrange {

// phi(x) = <Ax, x> + <x, a> + b
struct QuadForm {
  SymMatrix A;
  Vec a;
  double b = 0.0;

  QuadForm() = default;
  QuadForm(SymMatrix A_, Vec a_, double b_)
      : A(std::move(A_)), a(std::move(a_)), b(b_) {
    if (a.size() != static_cast<std::size_t>(A.dim()))
      throw InvalidInput("QuadForm: linear part length mismatch");
    if (!all_finite(a) || !std::isfinite(b))
      throw InvalidInput("QuadForm: non-finite entry");
  }

  // Purely quadratic lift of a symmetric matrix.
  static QuadForm homogeneous(SymMatrix A_) {
    const int n = A_.dim();
    return QuadForm(std::move(A_), Vec(n, 0.0), 0.0);
  }

  int dim() const { return A.dim(); }
};

inline double evaluate(const QuadForm& phi, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(phi.dim()))
    throw InvalidInput("evaluate: length mismatch");
  return phi.A.quad(x) + dot(x, phi.a) + phi.b;
}

inline Vec gradient(const QuadForm& phi, std::span<const double> x) {
  Vec g = phi.A.apply(x);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * g[i] + phi.a[i];
  return g;
}

inline Vec evaluate_tuple(std::span<const QuadForm> forms,
                          std::span<const double> x) {
  Vec out(forms.size());
  for (std::size_t j = 0; j < forms.size(); ++j) out[j] = evaluate(forms[j], x);
  return out;
}

inline std::vector<QuadForm> lift_tuple(std::span<const SymMatrix> ops) {
  std::vector<QuadForm> forms;
  forms.reserve(ops.size());
  for (const SymMatrix& m : ops) forms.push_back(QuadForm::homogeneous(m));
  return forms;
}

// alpha*phi + beta*psi, dimensions must agree.
inline QuadForm combine(double alpha, const QuadForm& phi, double beta,
                        const QuadForm& psi) {
  if (phi.dim() != psi.dim())
    throw InvalidInput("combine: dimension mismatch");
  SymMatrix a = phi.A.scaled_by(alpha);
  a.add_scaled(psi.A, beta);
  Vec lin = scaled(phi.a, alpha);
  axpy(beta, psi.a, lin);
  return QuadForm(std::move(a), std::move(lin), alpha * phi.b + beta * psi.b);
}

}  // namespace quadrange
