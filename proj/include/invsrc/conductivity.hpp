#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace invsrc {

/// Scalar conductivity field. Carries a printable name so runs can be
/// reproduced from serialized metadata.
class Conductivity {
public:
    using Field = std::function<double(double, double)>;

    Conductivity() : Conductivity(constant(1.0)) {}

    Conductivity(Field field, std::string name)
        : field_(std::move(field)), name_(std::move(name)) {
        if (!field_) throw std::invalid_argument("conductivity field is empty");
    }

    double operator()(double x, double y) const { return field_(x, y); }
    const std::string& name() const { return name_; }

    static Conductivity constant(double value) {
        if (!(value > 0.0)) {
            throw std::invalid_argument("conductivity must be positive");
        }
        return Conductivity([value](double, double) { return value; },
                            "constant:" + format_value(value));
    }

    /// Smooth non-constant field 2 + sin(x) cos(y), bounded in [1, 3].
    static Conductivity smooth_default() {
        return Conductivity(
            [](double x, double y) { return 2.0 + std::sin(x) * std::cos(y); },
            "smooth");
    }

    /// Accepts "smooth", "constant:<v>", or a bare number.
    static Conductivity parse(const std::string& text) {
        if (text == "smooth") return smooth_default();
        std::string body = text;
        if (text.rfind("constant:", 0) == 0) body = text.substr(9);
        try {
            std::size_t used = 0;
            const double value = std::stod(body, &used);
            if (used == body.size()) return constant(value);
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("cannot parse conductivity '" + text +
                                    "'; expected smooth, constant:<v>, or a number");
    }

private:
    static std::string format_value(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    Field field_;
    std::string name_;
};

} // namespace invsrc
