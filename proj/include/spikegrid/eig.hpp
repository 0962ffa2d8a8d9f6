#pragma once

#include "spikegrid/tensor.hpp"

namespace spikegrid {

struct SymEigResult {
    Tensor eigenvalues;   // [n], sorted descending
    Tensor eigenvectors;  // [n,n], column i pairs with eigenvalue i, unit norm
};

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
// Throws DomainError if A is not square/symmetric (tolerance 1e-5 relative
// to the largest entry), ConvergenceError if the sweep budget runs out.
SymEigResult sym_eig(const Tensor& a);

}  // namespace spikegrid
