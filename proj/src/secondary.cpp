#include "fasst/secondary.hpp"

#include <stdexcept>

namespace fasst {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

std::size_t SecondaryKernel::input_size() const {
  return std::visit(overloaded{[](const DenseOrthonormal& k) { return k.n(); },
                               [](const ReducedKernel& k) { return k.n; },
                               [](const FasstKernel& k) { return k.n; }},
                    k_);
}

std::size_t SecondaryKernel::output_size() const {
  if (const auto* r = std::get_if<ReducedKernel>(&k_)) return r->n_k;
  return input_size();
}

std::vector<double> SecondaryKernel::forward(std::span<const double> x) const {
  if (x.size() != input_size()) throw std::invalid_argument("SecondaryKernel::forward: length mismatch");
  return std::visit(overloaded{[&](const DenseOrthonormal& k) { return k.apply_transposed(x); },
                               [&](const ReducedKernel& k) { return k.forward(x); },
                               [&](const FasstKernel& k) { return apply_fasst(k, x, false); }},
                    k_);
}

std::vector<double> SecondaryKernel::inverse(std::span<const double> y) const {
  if (y.size() != output_size()) throw std::invalid_argument("SecondaryKernel::inverse: length mismatch");
  return std::visit(overloaded{[&](const DenseOrthonormal& k) { return k.apply(y); },
                               [&](const ReducedKernel& k) { return k.inverse(y); },
                               [&](const FasstKernel& k) { return apply_fasst(k, y, true); }},
                    k_);
}

DenseOrthonormal SecondaryKernel::dense() const {
  return std::visit(overloaded{[](const DenseOrthonormal& k) { return k; },
                               [](const ReducedKernel&) -> DenseOrthonormal {
                                 throw std::logic_error("reduced kernels have no square dense form");
                               },
                               [](const FasstKernel& k) { return to_dense(k); }},
                    k_);
}

std::string SecondaryKernel::type_name() const {
  return std::visit(overloaded{[](const DenseOrthonormal&) { return std::string("dense"); },
                               [](const ReducedKernel&) { return std::string("reduced"); },
                               [](const FasstKernel&) { return std::string("givens"); }},
                    k_);
}

}  // namespace fasst
