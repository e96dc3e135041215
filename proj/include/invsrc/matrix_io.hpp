#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "invsrc/types.hpp"

namespace invsrc {

// Dense Matrix Market "array real general" files, column-major body,
// written with enough digits to round-trip doubles.
void write_matrix_market(const Mat& matrix, std::ostream& out);
void write_matrix_market_file(const Mat& matrix, const std::string& path);
Mat read_matrix_market(std::istream& in);
Mat read_matrix_market_file(const std::string& path);

/// Metadata stored next to an exported forward matrix: which mesh vertices
/// the rows sample (in trace order) and how many frame elements the columns
/// cover, plus enough context to rebuild the operator.
struct ForwardMetadata {
    Index rows = 0;
    Index cols = 0;
    std::vector<int> trace_order;
    Index frame_size = 0;
    std::string domain;
    std::string conductivity;
    int quadrature_order = 0;
    double h_max = 0.0;
};

void write_forward_metadata_file(const ForwardMetadata& meta,
                                 const std::string& path);
ForwardMetadata read_forward_metadata_file(const std::string& path);

} // namespace invsrc
