#pragma once

#include <stdexcept>

namespace lamg {

/// Distance kernel localizing the regression; distances are in graph edges.
struct KernelSpec {
    enum class Kind { nearest_neighbor, tri_cube };
    Kind kind = Kind::tri_cube;
    int radius = 4;  // eta
};

/// Kernel weight at graph distance d: zero at and beyond the radius.
inline double kernel_weight(const KernelSpec& spec, int d) {
    if (d < 0) throw std::invalid_argument("kernel_weight: negative distance");
    if (spec.radius < 1) throw std::invalid_argument("kernel_weight: radius must be >= 1");
    if (d >= spec.radius) return 0.0;
    if (spec.kind == KernelSpec::Kind::nearest_neighbor) return 1.0;
    double q = static_cast<double>(d) / spec.radius;
    double w = 1.0 - q * q * q;
    return w * w * w;
}

}  // namespace lamg
