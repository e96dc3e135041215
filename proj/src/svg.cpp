#include "invsrc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace invsrc {

namespace {

struct Rgb {
    int r, g, b;
};

// diverging scale: deep blue (-1) through white (0) to deep red (+1)
Rgb diverging_color(double t) {
    t = std::clamp(t, -1.0, 1.0);
    const auto mix = [](int a, int b, double s) {
        return static_cast<int>(std::lround(a + (b - a) * s));
    };
    if (t < 0.0) {
        const double s = -t;
        return {mix(255, 33, s), mix(255, 102, s), mix(255, 172, s)};
    }
    const double s = t;
    return {mix(255, 178, s), mix(255, 24, s), mix(255, 43, s)};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void write_field_svg(const Mesh& mesh, const Vec& nodal_values,
                     const std::string& path, const std::string& title) {
    if (nodal_values.size() != mesh.vertex_count()) {
        throw std::invalid_argument("field length does not match mesh");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");

    const double min_x = mesh.vertices.col(0).minCoeff();
    const double max_x = mesh.vertices.col(0).maxCoeff();
    const double min_y = mesh.vertices.col(1).minCoeff();
    const double max_y = mesh.vertices.col(1).maxCoeff();
    const double span_x = std::max(max_x - min_x, 1e-12);
    const double span_y = std::max(max_y - min_y, 1e-12);

    const double width = 640.0;
    const double margin = 20.0;
    const double scale = (width - 2.0 * margin) / span_x;
    const double height = span_y * scale + 2.0 * margin;

    const auto px = [&](double x) { return margin + (x - min_x) * scale; };
    // SVG y grows downward
    const auto py = [&](double y) { return height - margin - (y - min_y) * scale; };

    const double peak = nodal_values.cwiseAbs().maxCoeff();

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width)
        << ' ' << fmt(height) << "\">\n";
    if (!title.empty()) {
        out << "<title>" << title << "</title>\n";
    }
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        double avg = 0.0;
        for (int e = 0; e < 3; ++e) avg += nodal_values(mesh.triangles(t, e));
        avg /= 3.0;
        const Rgb c = diverging_color(peak > 0.0 ? avg / peak : 0.0);
        out << "<polygon points=\"";
        for (int e = 0; e < 3; ++e) {
            const auto v = mesh.vertices.row(mesh.triangles(t, e));
            out << fmt(px(v.x())) << ',' << fmt(py(v.y()));
            if (e < 2) out << ' ';
        }
        out << "\" fill=\"rgb(" << c.r << ',' << c.g << ',' << c.b
            << ")\" stroke=\"rgb(210,210,210)\" stroke-width=\"0.3\"/>\n";
    }
    out << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(14.0)
        << "\" font-size=\"11\" font-family=\"sans-serif\">scale &#177;"
        << fmt(peak) << "</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

} // namespace invsrc
