#include "invsrc/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace invsrc {

void write_matrix_market(const Mat& matrix, std::ostream& out) {
    out << "%%MatrixMarket matrix array real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << '\n';
    out << std::setprecision(17);
    for (Index j = 0; j < matrix.cols(); ++j) {
        for (Index i = 0; i < matrix.rows(); ++i) {
            out << matrix(i, j) << '\n';
        }
    }
}

void write_matrix_market_file(const Mat& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix_market(matrix, out);
    if (!out) throw std::runtime_error("failed writing " + path);
}

Mat read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("matrix file is empty");
    }
    {
        std::istringstream header(line);
        std::string banner, object, format, field, symmetry;
        header >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%MatrixMarket" || object != "matrix" ||
            format != "array" || field != "real" || symmetry != "general") {
            throw std::runtime_error(
                "expected '%%MatrixMarket matrix array real general', got '" +
                line + "'");
        }
    }

    Index rows = -1, cols = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream sizes(line);
        if (!(sizes >> rows >> cols) || rows < 0 || cols < 0) {
            throw std::runtime_error("bad matrix size line '" + line + "'");
        }
        break;
    }
    if (rows < 0) throw std::runtime_error("matrix file has no size line");

    Mat matrix(rows, cols);
    Index count = 0;
    double value = 0.0;
    while (count < rows * cols && (in >> value)) {
        matrix(count % rows, count / rows) = value;
        ++count;
    }
    if (count != rows * cols) {
        throw std::runtime_error("matrix file ended after " +
                                 std::to_string(count) + " of " +
                                 std::to_string(rows * cols) + " entries");
    }
    if (in >> value) {
        throw std::runtime_error("matrix file has trailing entries");
    }
    return matrix;
}

Mat read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix_market(in);
}

void write_forward_metadata_file(const ForwardMetadata& meta,
                                 const std::string& path) {
    nlohmann::json doc;
    doc["rows"] = meta.rows;
    doc["cols"] = meta.cols;
    doc["trace_order"] = meta.trace_order;
    doc["frame_size"] = meta.frame_size;
    doc["domain"] = meta.domain;
    doc["conductivity"] = meta.conductivity;
    doc["quadrature_order"] = meta.quadrature_order;
    doc["h_max"] = meta.h_max;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
}

ForwardMetadata read_forward_metadata_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    ForwardMetadata meta;
    meta.rows = doc.at("rows").get<Index>();
    meta.cols = doc.at("cols").get<Index>();
    meta.trace_order = doc.at("trace_order").get<std::vector<int>>();
    meta.frame_size = doc.at("frame_size").get<Index>();
    meta.domain = doc.value("domain", std::string());
    meta.conductivity = doc.value("conductivity", std::string());
    meta.quadrature_order = doc.value("quadrature_order", 0);
    meta.h_max = doc.value("h_max", 0.0);
    if (static_cast<Index>(meta.trace_order.size()) != meta.rows) {
        throw std::runtime_error("trace_order length does not match rows in " +
                                 path);
    }
    return meta;
}

} // namespace invsrc
