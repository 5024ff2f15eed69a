#pragma once

#include "igbm/params.hpp"
#include "igbm/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace igbm {

// p x N array of +-1 entries, row-major by pattern.
struct PatternSet {
    int p = 0;
    int N = 0;
    std::vector<std::int8_t> xi;

    int operator()(int mu, int i) const { return xi[static_cast<std::size_t>(mu) * N + i]; }
    std::span<const std::int8_t> row(int mu) const {
        return {xi.data() + static_cast<std::size_t>(mu) * N, static_cast<std::size_t>(N)};
    }
};

// Sparse J_ij in compressed row form (row-major, columns ascending, no
// diagonal). Entry (i, j) multiplies g(u_j) in the equation for u_i.
class CouplingMatrix {
public:
    CouplingMatrix() = default;

    int N() const { return n_; }
    bool fully_connected() const { return full_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::size_t> row_offsets() const { return row_ptr_; }
    std::span<const int> columns() const { return cols_; }
    std::span<const double> values() const { return values_; }

    std::optional<double> at(int i, int j) const;
    int degree(int i) const { return static_cast<int>(row_ptr_[i + 1] - row_ptr_[i]); }

    // y_i = sum_j J_ij x_j
    void multiply(std::span<const double> x, std::span<double> y) const;

    const std::optional<PatternSet>& patterns() const { return patterns_; }

    // Builds from triplets; sorts into row-major order, rejects diagonal entries.
    struct Triplet {
        int i, j;
        double v;
    };
    static CouplingMatrix from_triplets(int N, std::vector<Triplet> entries, bool full,
                                        std::optional<PatternSet> patterns = std::nullopt);

    bool operator==(const CouplingMatrix& o) const;

private:
    int n_ = 0;
    bool full_ = false;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
    std::optional<PatternSet> patterns_;

    friend CouplingMatrix add_hebbian(const CouplingMatrix&, const PatternSet&);
};

// Erdos-Renyi links with probability c/(N-1) per unordered pair (always if
// full). Linked pairs get J0/c + J/sqrt(c) x for both directions with
// corr(x_ij, x_ji) = alpha.
CouplingMatrix generate_couplings(const CouplingSpec& spec, const RngStream& stream);

PatternSet generate_patterns(int N, int p, const RngStream& stream);

// J_ij += (1/N) sum_mu xi_i^mu xi_j^mu for all i != j.
CouplingMatrix add_hebbian(const CouplingMatrix& matrix, const PatternSet& patterns);

// Full pipeline used by the commands: Gaussian part from the "couplings"
// sub-stream and, when spec.hebbian_p > 0, patterns from "patterns".
CouplingMatrix build_coupling_matrix(const CouplingSpec& spec, const RngStream& root);

// CSV rows "i,j,J_ij" plus a JSON header (N, spec, seed).
void save_couplings(const CouplingMatrix& m, const CouplingSpec& spec, std::uint64_t seed,
                    const std::filesystem::path& csv_path, const std::filesystem::path& json_path);
CouplingMatrix load_couplings(const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path);

}  // namespace igbm
