#include "lamg/fem.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lamg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

}  // namespace

Mesh disc_mesh(int levels, int fan) {
    if (levels < 0) throw std::invalid_argument("disc_mesh: levels must be >= 0");
    if (fan < 3) throw std::invalid_argument("disc_mesh: fan must be >= 3");

    Mesh mesh;
    mesh.vertices.push_back({0.0, 0.0});
    mesh.boundary.push_back(0);
    for (int k = 0; k < fan; ++k) {
        double a = 2.0 * kPi * k / fan;
        mesh.vertices.push_back({std::cos(a), std::sin(a)});
        mesh.boundary.push_back(1);
    }
    for (int k = 0; k < fan; ++k) mesh.triangles.push_back({0, 1 + k, 1 + (k + 1) % fan});

    for (int lvl = 0; lvl < levels; ++lvl) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            std::array<double, 2> p = {0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                                       0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])};
            char bd = mesh.boundary[a] && mesh.boundary[b];
            if (bd) {
                double r = std::hypot(p[0], p[1]);
                p[0] /= r;
                p[1] /= r;
            }
            int idx = mesh.nvertices();
            mesh.vertices.push_back(p);
            mesh.boundary.push_back(bd);
            midpoint.emplace(key, idx);
            return idx;
        };

        std::vector<std::array<int, 3>> refined;
        refined.reserve(4 * mesh.triangles.size());
        for (const auto& t : mesh.triangles) {
            int ab = mid(t[0], t[1]);
            int bc = mid(t[1], t[2]);
            int ca = mid(t[2], t[0]);
            refined.push_back({t[0], ab, ca});
            refined.push_back({ab, t[1], bc});
            refined.push_back({ca, bc, t[2]});
            refined.push_back({ab, bc, ca});
        }
        mesh.triangles = std::move(refined);
    }
    return mesh;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << mesh.nvertices() << " " << mesh.ntriangles() << "\n";
    char buf[80];
    for (int i = 0; i < mesh.nvertices(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %d", mesh.vertices[i][0], mesh.vertices[i][1],
                      mesh.boundary[i] ? 1 : 0);
        out << buf << "\n";
    }
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

Mesh read_mesh(std::istream& in) {
    // Skip '#' comment lines ahead of the header.
    while (in.peek() == '#') {
        std::string skip;
        std::getline(in, skip);
    }
    int nv = 0, nt = 0;
    if (!(in >> nv >> nt)) throw std::runtime_error("read_mesh: bad header");
    Mesh mesh;
    mesh.vertices.resize(nv);
    mesh.boundary.resize(nv);
    for (int i = 0; i < nv; ++i) {
        int b = 0;
        if (!(in >> mesh.vertices[i][0] >> mesh.vertices[i][1] >> b))
            throw std::runtime_error("read_mesh: bad vertex line");
        mesh.boundary[i] = static_cast<char>(b != 0);
    }
    mesh.triangles.resize(nt);
    for (int i = 0; i < nt; ++i) {
        auto& t = mesh.triangles[i];
        if (!(in >> t[0] >> t[1] >> t[2])) throw std::runtime_error("read_mesh: bad triangle line");
        for (int v : t)
            if (v < 0 || v >= nv) throw std::runtime_error("read_mesh: triangle index out of range");
    }
    return mesh;
}

DiffusionCoefficients coefficients_from_angle(const AnisotropyParams& p) {
    if (p.epsilon <= 0.0) throw std::invalid_argument("coefficients_from_angle: epsilon must be > 0");
    double ca = std::cos(p.alpha), sa = std::sin(p.alpha);
    DiffusionCoefficients c;
    c.c1 = ca * ca + p.epsilon * sa * sa;
    c.c2 = sa * sa + p.epsilon * ca * ca;
    c.c3 = 0.5 * (1.0 - p.epsilon) * std::sin(2.0 * p.alpha);
    return c;
}

std::array<std::array<double, 3>, 3> local_stiffness(const std::array<double, 2>& p0,
                                                     const std::array<double, 2>& p1,
                                                     const std::array<double, 2>& p2,
                                                     const DiffusionCoefficients& c) {
    double area = signed_area(p0, p1, p2);
    if (area <= 1e-14) throw std::runtime_error("local_stiffness: degenerate or inverted triangle");

    // Gradients of the barycentric basis functions are constant:
    // grad phi_i = (b_i, c_i) / (2 area) with the classic edge differences.
    const std::array<double, 2> pts[3] = {p0, p1, p2};
    double gx[3], gy[3];
    for (int i = 0; i < 3; ++i) {
        const auto& pj = pts[(i + 1) % 3];
        const auto& pk = pts[(i + 2) % 3];
        gx[i] = (pj[1] - pk[1]) / (2.0 * area);
        gy[i] = (pk[0] - pj[0]) / (2.0 * area);
    }

    std::array<std::array<double, 3>, 3> K{};
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            double v = area * (c.c1 * gx[a] * gx[b] + c.c2 * gy[a] * gy[b] +
                               c.c3 * (gx[a] * gy[b] + gy[a] * gx[b]));
            K[a][b] = v;
            K[b][a] = v;
        }
    }
    return K;
}

namespace {

std::vector<Triplet> stiffness_triplets(const Mesh& mesh, const DiffusionCoefficients& c) {
    std::vector<Triplet> trips;
    trips.reserve(9 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        auto K = local_stiffness(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], c);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) trips.push_back({t[a], t[b], K[a][b]});
    }
    return trips;
}

}  // namespace

AssembledSystem assemble(const Mesh& mesh, const DiffusionCoefficients& c) {
    std::vector<int> sys_index(mesh.nvertices(), -1);
    AssembledSystem out;
    for (int v = 0; v < mesh.nvertices(); ++v) {
        if (!mesh.boundary[v]) {
            sys_index[v] = static_cast<int>(out.interior_map.size());
            out.interior_map.push_back(v);
        }
    }
    std::vector<Triplet> trips;
    for (const Triplet& t : stiffness_triplets(mesh, c)) {
        int r = sys_index[t.row], col = sys_index[t.col];
        if (r >= 0 && col >= 0) trips.push_back({r, col, t.value});
    }
    int n = static_cast<int>(out.interior_map.size());
    out.A = csr_from_triplets(n, n, trips);
    return out;
}

SparseMatrix assemble_neumann(const Mesh& mesh, const DiffusionCoefficients& c) {
    auto trips = stiffness_triplets(mesh, c);
    return csr_from_triplets(mesh.nvertices(), mesh.nvertices(), trips);
}

std::vector<double> assemble_unit_load(const Mesh& mesh, const std::vector<int>& interior_map) {
    std::vector<double> lumped(mesh.nvertices(), 0.0);
    for (const auto& t : mesh.triangles) {
        double area = signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        for (int v : t) lumped[v] += area / 3.0;
    }
    std::vector<double> b(interior_map.size());
    for (size_t i = 0; i < interior_map.size(); ++i) b[i] = lumped[interior_map[i]];
    return b;
}

}  // namespace lamg
