#pragma once

#include <vector>

#include "invsrc/types.hpp"

namespace invsrc {

/// Sparse ground-truth configuration: which frame indices carry mass and
/// with what signed magnitudes.
struct SourceConfig {
    Index n = 0;
    std::vector<Index> support; // unique indices in [0, n)
    Vec values;                 // nonzero, aligned with support

    Index sparsity() const { return static_cast<Index>(support.size()); }

    /// Throws std::invalid_argument on duplicates, out-of-range indices,
    /// zero values, or a length mismatch.
    void validate() const;

    /// x* as a dense length-n vector.
    Vec dense() const;

    /// sgn(x*) restricted to the support, aligned with it.
    Vec signs() const;

    static SourceConfig from_dense(const Vec& x, double tol = 0.0);
};

} // namespace invsrc
