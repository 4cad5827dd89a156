#pragma once

#include "metasolve/dense.hpp"
#include "metasolve/linalg.hpp"

#include <span>
#include <string>

namespace metasolve {

/// Linear map r -> z approximating A^{-1} r. Implementations are immutable after
/// construction and safe to apply concurrently with caller-owned vectors.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    [[nodiscard]] virtual Index size() const = 0;
    virtual void apply(std::span<const double> r, std::span<double> z, CostCounter& counter) const = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    [[nodiscard]] virtual std::size_t bytes() const { return 0; }
};

/// z = r, no MACs.
class IdentityPreconditioner final : public Preconditioner {
public:
    explicit IdentityPreconditioner(Index n) : n_(n) {}
    [[nodiscard]] Index size() const override { return n_; }
    void apply(std::span<const double> r, std::span<double> z, CostCounter&) const override;
    [[nodiscard]] std::string describe() const override { return "none"; }

private:
    Index n_;
};

/// z = A^{-1} r through a dense LU; n^2 MACs per application.
class DirectPreconditioner final : public Preconditioner {
public:
    explicit DirectPreconditioner(const SparseMatrix& a);
    DirectPreconditioner(const SparseMatrix& a, CostCounter& setup_counter);
    [[nodiscard]] Index size() const override { return lu_.size(); }
    void apply(std::span<const double> r, std::span<double> z, CostCounter& counter) const override;
    [[nodiscard]] std::string describe() const override { return "direct"; }
    [[nodiscard]] std::size_t bytes() const override { return lu_.bytes(); }

private:
    LuFactorization lu_;
};

}  // namespace metasolve
