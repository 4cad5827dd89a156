#pragma once

#include "metasolve/dense.hpp"
#include "metasolve/linalg.hpp"
#include "metasolve/mesh_fem.hpp"

#include <cstdint>
#include <string>

namespace metasolve {

enum class BasisKind { FromFile, Geometric, RandomSmoothedQR };

class RankError : public std::invalid_argument {
public:
    RankError(const std::string& what, double smallest_singular_value)
        : std::invalid_argument(what), smallest_singular_value_(smallest_singular_value)
    {
    }
    [[nodiscard]] double smallest_singular_value() const { return smallest_singular_value_; }

private:
    double smallest_singular_value_;
};

inline constexpr double kRankTolerance = 1e-10;

/// Prolongation P (n_fine x n_coarse); restriction is P^T.
/// Construction enforces full column rank and n_coarse < n_fine.
class ProlongationBasis {
public:
    ProlongationBasis(DenseMatrix p, BasisKind kind, std::string source);

    [[nodiscard]] const DenseMatrix& matrix() const { return p_; }
    [[nodiscard]] Index fine_size() const { return p_.rows(); }
    [[nodiscard]] Index coarse_size() const { return p_.cols(); }
    [[nodiscard]] BasisKind kind() const { return kind_; }
    [[nodiscard]] const std::string& source() const { return source_; }
    [[nodiscard]] double smallest_singular_value() const { return sigma_min_; }

    /// Entries with nonzero value in the linalg matrix text format.
    [[nodiscard]] SparseMatrix to_sparse() const;

private:
    DenseMatrix p_;
    BasisKind kind_;
    std::string source_;
    double sigma_min_ = 0.0;
};

/// Reads a basis in the linalg matrix text format. `expected_rows` < 0 skips the row check.
ProlongationBasis load_basis(const std::string& path, Index expected_rows = -1);
void save_basis(const std::string& path, const ProlongationBasis& basis);

/// Bilinear interpolation from a coarse structured grid to the fine grid, restricted
/// to interior nodes on both levels. Requires (fine_n - 1) divisible by (coarse_n - 1).
ProlongationBasis geometric_basis(const StructuredMesh& fine, Index coarse_n);

/// Full bilinear interpolation matrix over all nodes (fine node count x coarse node count).
DenseMatrix bilinear_interpolation(const StructuredMesh& fine, Index coarse_n);

/// Same column space, orthonormal columns (thin QR).
ProlongationBasis orthonormalize(const ProlongationBasis& basis);

/// Random Gaussian columns smoothed by weighted Jacobi (omega = 2/3) against A, then orthonormalized.
ProlongationBasis random_smoothed_qr_basis(const SparseMatrix& a, Index n_coarse, int smoothing_sweeps,
                                           std::uint64_t seed);

/// Coarse grid sizes for successive geometric levels: each step divides the interval
/// count by its smallest prime factor. Stops when no interior node would remain.
std::vector<Index> geometric_coarse_chain(Index fine_n, int extra_levels);

}  // namespace metasolve
