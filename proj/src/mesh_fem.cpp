#include "metasolve/mesh_fem.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>

namespace metasolve {

StructuredMesh::StructuredMesh(Index n) : n_(n)
{
    if (n < 2) throw std::invalid_argument("build_mesh: need at least 2 nodes per side, got " + std::to_string(n));
    const double h = 1.0 / static_cast<double>(n - 1);
    nodes_.reserve(static_cast<std::size_t>(n * n));
    boundary_.reserve(static_cast<std::size_t>(n * n));
    interior_index_.assign(static_cast<std::size_t>(n * n), -1);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            nodes_.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
            const bool on_boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            boundary_.push_back(on_boundary);
            if (!on_boundary) {
                interior_index_[node(i, j)] = static_cast<Index>(interior_.size());
                interior_.push_back(node(i, j));
            }
        }
    }
    triangles_.reserve(static_cast<std::size_t>(2 * (n - 1) * (n - 1)));
    for (Index j = 0; j + 1 < n; ++j) {
        for (Index i = 0; i + 1 < n; ++i) {
            const Index a = node(i, j);
            const Index b = node(i + 1, j);
            const Index c = node(i + 1, j + 1);
            const Index d = node(i, j + 1);
            triangles_.push_back({a, b, c});
            triangles_.push_back({a, c, d});
        }
    }
}

double StructuredMesh::signed_area(Index t) const
{
    const auto& [a, b, c] = triangles_[t];
    const auto& pa = nodes_[a];
    const auto& pb = nodes_[b];
    const auto& pc = nodes_[c];
    return 0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
}

std::shared_ptr<const StructuredMesh> build_mesh(Index n) { return std::make_shared<const StructuredMesh>(n); }

ScalarField::ScalarField(std::shared_ptr<const StructuredMesh> m, Vector v) : mesh(std::move(m)), values(std::move(v))
{
    if (!mesh) throw std::invalid_argument("ScalarField: null mesh");
    if (static_cast<Index>(values.size()) != mesh->node_count())
        throw DimensionError("ScalarField: value count does not match mesh node count");
}

ScalarField::ScalarField(std::shared_ptr<const StructuredMesh> m, double constant)
    : ScalarField(m, Vector(static_cast<std::size_t>(m->node_count()), constant))
{
}

Vector ScalarField::interior_values() const
{
    Vector out;
    out.reserve(mesh->interior_nodes().size());
    for (const Index node : mesh->interior_nodes()) out.push_back(values[node]);
    return out;
}

ScalarField ScalarField::from_interior(std::shared_ptr<const StructuredMesh> mesh, std::span<const double> interior)
{
    if (static_cast<Index>(interior.size()) != mesh->interior_count())
        throw DimensionError("ScalarField::from_interior: length does not match interior node count");
    Vector values(static_cast<std::size_t>(mesh->node_count()), 0.0);
    for (std::size_t k = 0; k < interior.size(); ++k) values[mesh->interior_nodes()[k]] = interior[k];
    return ScalarField(std::move(mesh), std::move(values));
}

void write_field_csv(std::ostream& out, const ScalarField& field)
{
    out << "x,y,value\n" << std::setprecision(17);
    const auto& nodes = field.mesh->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        out << nodes[i][0] << ',' << nodes[i][1] << ',' << field.values[i] << '\n';
}

Vector FemSystem::dirichlet_lift(const SparseMatrix& coupling, std::span<const double> node_values) const
{
    Vector g(boundary_nodes.size());
    for (std::size_t k = 0; k < boundary_nodes.size(); ++k) g[k] = node_values[boundary_nodes[k]];
    CostCounter scratch;
    Vector out = spmv(coupling, g, scratch);
    for (auto& v : out) v = -v;
    return out;
}

FemSystem assemble(const StructuredMesh& mesh, const ScalarField& k)
{
    if (static_cast<Index>(k.values.size()) != mesh.node_count())
        throw DimensionError("assemble: coefficient does not live on this mesh");
    for (const double v : k.values)
        if (!std::isfinite(v)) throw std::invalid_argument("assemble: non-finite coefficient value");

    std::vector<Triplet> stiff;
    std::vector<Triplet> mass;
    stiff.reserve(mesh.triangles().size() * 9);
    mass.reserve(mesh.triangles().size() * 9);
    const auto& nodes = mesh.nodes();
    for (Index t = 0; t < static_cast<Index>(mesh.triangles().size()); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.signed_area(t);
        const double kbar = (k.values[tri[0]] + k.values[tri[1]] + k.values[tri[2]]) / 3.0;
        std::array<std::array<double, 2>, 3> grad{};
        for (int a = 0; a < 3; ++a) {
            const auto& pj = nodes[tri[(a + 1) % 3]];
            const auto& pk = nodes[tri[(a + 2) % 3]];
            grad[a] = {(pj[1] - pk[1]) / (2.0 * area), (pk[0] - pj[0]) / (2.0 * area)};
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double g = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
                stiff.push_back({tri[a], tri[b], kbar * area * g});
                mass.push_back({tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0)});
            }
        }
    }
    const Index n_nodes = mesh.node_count();
    FemSystem sys;
    sys.stiffness_full = SparseMatrix::from_triplets(n_nodes, n_nodes, std::move(stiff));
    sys.mass_full = SparseMatrix::from_triplets(n_nodes, n_nodes, std::move(mass));

    std::vector<Index> boundary_index(static_cast<std::size_t>(n_nodes), -1);
    for (Index node = 0; node < n_nodes; ++node) {
        if (mesh.boundary_mask()[node]) {
            boundary_index[node] = static_cast<Index>(sys.boundary_nodes.size());
            sys.boundary_nodes.push_back(node);
        }
    }
    const Index n_int = mesh.interior_count();
    const Index n_bnd = static_cast<Index>(sys.boundary_nodes.size());
    auto split = [&](const SparseMatrix& full, SparseMatrix& interior, SparseMatrix& coupling) {
        std::vector<Triplet> ii;
        std::vector<Triplet> ib;
        for (Index r = 0; r < n_int; ++r) {
            const Index node = mesh.interior_nodes()[r];
            for (Index q = full.row_offsets()[node]; q < full.row_offsets()[node + 1]; ++q) {
                const Index col = full.col_indices()[q];
                const double v = full.values()[q];
                if (mesh.boundary_mask()[col])
                    ib.push_back({r, boundary_index[col], v});
                else
                    ii.push_back({r, mesh.interior_index(col), v});
            }
        }
        interior = SparseMatrix::from_triplets(n_int, n_int, std::move(ii));
        coupling = SparseMatrix::from_triplets(n_int, n_bnd, std::move(ib));
    };
    split(sys.stiffness_full, sys.stiffness, sys.stiffness_boundary);
    split(sys.mass_full, sys.mass, sys.mass_boundary);

    sys.lumped_mass.assign(static_cast<std::size_t>(n_int), 0.0);
    for (Index r = 0; r < n_int; ++r) {
        const Index node = mesh.interior_nodes()[r];
        double s = 0.0;
        for (Index q = sys.mass_full.row_offsets()[node]; q < sys.mass_full.row_offsets()[node + 1]; ++q)
            s += sys.mass_full.values()[q];
        sys.lumped_mass[r] = s;
    }
    return sys;
}

GrfSampler::GrfSampler(const GrfSpec& spec, std::shared_ptr<const StructuredMesh> mesh)
    : spec_(spec), mesh_(std::move(mesh))
{
    if (spec_.variance_scale < 0.0) throw std::invalid_argument("GrfSpec: variance_scale must be >= 0");
    if (!(spec_.corr_len > 0.0)) throw std::invalid_argument("GrfSpec: corr_len must be > 0");
    const Index n = mesh_->node_count();
    if (n > 5000) throw std::invalid_argument("grf_sample: mesh too large for a dense covariance factorization");
    if (spec_.variance_scale == 0.0) return;
    DenseMatrix cov(n, n);
    const auto& nodes = mesh_->nodes();
    const double denom = 2.0 * spec_.corr_len * spec_.corr_len;
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double dx = nodes[i][0] - nodes[j][0];
            const double dy = nodes[i][1] - nodes[j][1];
            cov(i, j) = spec_.variance_scale * std::exp(-(dx * dx + dy * dy) / denom);
        }
        cov(j, j) += 1e-10 * spec_.variance_scale;
    }
    try {
        factor_ = std::make_unique<CholeskyFactorization>(std::move(cov));
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("grf_sample: covariance factorization failed after nugget: ") + e.what());
    }
}

std::vector<Vector> GrfSampler::raw_samples(std::size_t count) const
{
    const auto n = static_cast<std::size_t>(mesh_->node_count());
    std::mt19937_64 rng(spec_.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(count);
    Vector xi(n);
    for (std::size_t s = 0; s < count; ++s) {
        Vector z(n, 0.0);
        if (factor_) {
            for (auto& v : xi) v = normal(rng);
            factor_->multiply_lower(xi, z);
        }
        for (auto& v : z) v += spec_.mean;
        out.push_back(std::move(z));
    }
    return out;
}

ScalarField GrfSampler::sample() const
{
    Vector z = std::move(raw_samples(1).front());
    for (auto& v : z) v = std::max(v, spec_.floor);
    return ScalarField(mesh_, std::move(z));
}

ScalarField grf_sample(const GrfSpec& spec, std::shared_ptr<const StructuredMesh> mesh)
{
    return GrfSampler(spec, std::move(mesh)).sample();
}

GrfSpec benchmark_coefficient_spec(std::uint64_t seed) { return GrfSpec{1.0, 0.3, 0.1, 0.1, seed}; }

GrfSpec benchmark_forcing_spec(std::uint64_t seed)
{
    return GrfSpec{0.0, 1.0, 0.1, -std::numeric_limits<double>::infinity(), seed + 1};
}

}  // namespace metasolve
