#pragma once

#include "metasolve/dense.hpp"
#include "metasolve/linalg.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace metasolve {

/// Uniform triangulation of [0,1]^2 with n nodes per side. Each cell is split
/// along the diagonal from its lower-left to its upper-right corner.
class StructuredMesh {
public:
    explicit StructuredMesh(Index n);

    [[nodiscard]] Index n() const { return n_; }
    [[nodiscard]] double h() const { return 1.0 / static_cast<double>(n_ - 1); }
    [[nodiscard]] Index node_count() const { return n_ * n_; }
    [[nodiscard]] Index node(Index i, Index j) const { return j * n_ + i; }

    [[nodiscard]] const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
    [[nodiscard]] const std::vector<bool>& boundary_mask() const { return boundary_; }

    /// Node ids of interior nodes in ascending order; these index the unknowns.
    [[nodiscard]] const std::vector<Index>& interior_nodes() const { return interior_; }
    /// Interior unknown number of a node, or -1 for boundary nodes.
    [[nodiscard]] Index interior_index(Index node) const { return interior_index_[node]; }
    [[nodiscard]] Index interior_count() const { return static_cast<Index>(interior_.size()); }

    [[nodiscard]] double signed_area(Index triangle) const;

private:
    Index n_;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<std::array<Index, 3>> triangles_;
    std::vector<bool> boundary_;
    std::vector<Index> interior_;
    std::vector<Index> interior_index_;
};

std::shared_ptr<const StructuredMesh> build_mesh(Index n);

/// Nodal P1 field.
struct ScalarField {
    ScalarField(std::shared_ptr<const StructuredMesh> mesh, Vector values);
    ScalarField(std::shared_ptr<const StructuredMesh> mesh, double constant);

    std::shared_ptr<const StructuredMesh> mesh;
    Vector values;

    /// Values at interior nodes, in interior unknown order.
    [[nodiscard]] Vector interior_values() const;
    /// Field with the given interior values and zero on the boundary.
    static ScalarField from_interior(std::shared_ptr<const StructuredMesh> mesh, std::span<const double> interior);
};

/// Writes `x,y,value` rows with a header line.
void write_field_csv(std::ostream& out, const ScalarField& field);

/// Assembled P1 operators on the full node set and their interior blocks.
struct FemSystem {
    SparseMatrix stiffness_full;  // \int k grad(phi_i) . grad(phi_j), all nodes
    SparseMatrix mass_full;       // \int phi_i phi_j, all nodes
    SparseMatrix stiffness;       // interior-interior block
    SparseMatrix mass;            // interior-interior block
    SparseMatrix stiffness_boundary;  // interior rows, boundary columns (boundary index order = node order)
    SparseMatrix mass_boundary;
    Vector lumped_mass;           // interior row sums of mass_full

    /// Right-hand-side contribution -A_IB g of Dirichlet data g given on all nodes
    /// (only boundary entries are read).
    [[nodiscard]] Vector dirichlet_lift(const SparseMatrix& coupling, std::span<const double> node_values) const;

    std::vector<Index> boundary_nodes;
};

/// P1 assembly with the coefficient taken piecewise constant per triangle (vertex average).
/// Dirichlet nodes are eliminated symmetrically; the interior blocks form the reduced system.
FemSystem assemble(const StructuredMesh& mesh, const ScalarField& k);

struct GrfSpec {
    double mean = 0.0;
    double variance_scale = 1.0;  // sigma in K = sigma exp(-|x-x'|^2 / (2 l^2))
    double corr_len = 0.1;
    double floor = -std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

/// Gaussian random field sampler with a cached factorization of the covariance.
class GrfSampler {
public:
    GrfSampler(const GrfSpec& spec, std::shared_ptr<const StructuredMesh> mesh);

    /// Draws from a generator seeded with spec.seed (deterministic).
    [[nodiscard]] ScalarField sample() const;
    /// Draws `count` consecutive samples from one seeded stream, without the floor.
    [[nodiscard]] std::vector<Vector> raw_samples(std::size_t count) const;

private:
    GrfSpec spec_;
    std::shared_ptr<const StructuredMesh> mesh_;
    std::unique_ptr<CholeskyFactorization> factor_;
};

ScalarField grf_sample(const GrfSpec& spec, std::shared_ptr<const StructuredMesh> mesh);

/// Coefficient and forcing laws of the reaction-diffusion benchmark.
GrfSpec benchmark_coefficient_spec(std::uint64_t seed);
GrfSpec benchmark_forcing_spec(std::uint64_t seed);

}  // namespace metasolve
