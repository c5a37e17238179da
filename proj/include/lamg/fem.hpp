#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "lamg/sparse.hpp"

namespace lamg {

/// Triangulation of the unit disc. Triangles are counterclockwise and
/// boundary vertices lie on the unit circle.
struct Mesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<char> boundary;

    int nvertices() const { return static_cast<int>(vertices.size()); }
    int ntriangles() const { return static_cast<int>(triangles.size()); }
};

/// Uniform refinement of a fan of `fan` triangles inscribed in the unit
/// circle; each level splits every triangle into four by edge midpoints and
/// projects boundary midpoints radially onto the circle. Deterministic.
Mesh disc_mesh(int levels, int fan = 6);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

struct AnisotropyParams {
    double alpha = 0.0;    // direction, radians
    double epsilon = 1.0;  // strength; 1 = isotropic
};

struct DiffusionCoefficients {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 0.0;
};

DiffusionCoefficients coefficients_from_angle(const AnisotropyParams& p);

/// Element stiffness of -div(C grad u) for linear elements on one triangle,
/// C = [[c1, c3], [c3, c2]]. Throws on degenerate triangles.
std::array<std::array<double, 3>, 3> local_stiffness(const std::array<double, 2>& p0,
                                                     const std::array<double, 2>& p1,
                                                     const std::array<double, 2>& p2,
                                                     const DiffusionCoefficients& c);

struct AssembledSystem {
    SparseMatrix A;                 // interior system, Dirichlet rows/cols eliminated
    std::vector<int> interior_map;  // interior index -> mesh vertex index
};

AssembledSystem assemble(const Mesh& mesh, const DiffusionCoefficients& c);

/// Full stiffness matrix over all vertices, no boundary elimination.
SparseMatrix assemble_neumann(const Mesh& mesh, const DiffusionCoefficients& c);

/// Lumped P1 load vector for f = 1 on the interior system.
std::vector<double> assemble_unit_load(const Mesh& mesh, const std::vector<int>& interior_map);

}  // namespace lamg
