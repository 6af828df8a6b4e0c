#pragma once

#include "hallq/hamiltonian.hpp"

namespace hq {

// Single-particle form of a fermion model whose terms are all of the form
// const + sum_ab h_ab c_a^dag c_b. Modes are numbered site * k + orbital.
struct QuadraticModel {
    int modes = 0;
    int particles = 0;
    double constant = 0.0;
    TwistedFamily family;  // single-particle h(flux)
};

// Largest deviation of any term from its quadratic reconstruction.
double quadratic_residual(const ModelSpec& spec);

QuadraticModel extract_quadratic(const ModelSpec& spec, const TermFilter& keep = {}, double tol = 1e-10);

}  // namespace hq
