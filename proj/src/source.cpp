#include "invsrc/source.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace invsrc {

void SourceConfig::validate() const {
    if (values.size() != sparsity()) {
        throw std::invalid_argument("support and values lengths differ");
    }
    std::set<Index> seen;
    for (Index pos = 0; pos < sparsity(); ++pos) {
        const Index j = support[static_cast<std::size_t>(pos)];
        if (j < 0 || j >= n) {
            throw std::invalid_argument("support index " + std::to_string(j) +
                                        " outside [0, " + std::to_string(n) +
                                        ")");
        }
        if (!seen.insert(j).second) {
            throw std::invalid_argument("support index " + std::to_string(j) +
                                        " repeated");
        }
        if (values(pos) == 0.0 || !std::isfinite(values(pos))) {
            throw std::invalid_argument("source value at index " +
                                        std::to_string(j) +
                                        " must be finite and nonzero");
        }
    }
}

Vec SourceConfig::dense() const {
    validate();
    Vec x = Vec::Zero(n);
    for (Index pos = 0; pos < sparsity(); ++pos) {
        x(support[static_cast<std::size_t>(pos)]) = values(pos);
    }
    return x;
}

Vec SourceConfig::signs() const {
    validate();
    Vec s(sparsity());
    for (Index pos = 0; pos < sparsity(); ++pos) {
        s(pos) = values(pos) > 0.0 ? 1.0 : -1.0;
    }
    return s;
}

SourceConfig SourceConfig::from_dense(const Vec& x, double tol) {
    SourceConfig config;
    config.n = x.size();
    std::vector<double> vals;
    for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i)) > tol) {
            config.support.push_back(i);
            vals.push_back(x(i));
        }
    }
    config.values.resize(static_cast<Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        config.values(static_cast<Index>(i)) = vals[i];
    }
    return config;
}

} // namespace invsrc
