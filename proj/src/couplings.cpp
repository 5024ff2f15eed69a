#include "igbm/couplings.hpp"

#include "igbm/error.hpp"
#include "igbm/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace igbm {

std::optional<double> CouplingMatrix::at(int i, int j) const {
    const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return std::nullopt;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void CouplingMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
        y[i] = acc;
    }
}

CouplingMatrix CouplingMatrix::from_triplets(int N, std::vector<Triplet> entries, bool full,
                                             std::optional<PatternSet> patterns) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    CouplingMatrix m;
    m.n_ = N;
    m.full_ = full;
    m.row_ptr_.assign(static_cast<std::size_t>(N) + 1, 0);
    m.cols_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (e.i < 0 || e.i >= N || e.j < 0 || e.j >= N) throw ParameterError("coupling index out of range");
        if (e.i == e.j) throw ParameterError("coupling matrix may not carry diagonal entries");
        if (k > 0 && entries[k - 1].i == e.i && entries[k - 1].j == e.j) {
            throw ParameterError("duplicate coupling entry");
        }
        m.row_ptr_[e.i + 1]++;
        m.cols_.push_back(e.j);
        m.values_.push_back(e.v);
    }
    for (int i = 0; i < N; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
    m.patterns_ = std::move(patterns);
    return m;
}

bool CouplingMatrix::operator==(const CouplingMatrix& o) const {
    const bool same_patterns =
        patterns_.has_value() == o.patterns_.has_value() &&
        (!patterns_ || (patterns_->p == o.patterns_->p && patterns_->xi == o.patterns_->xi));
    return n_ == o.n_ && full_ == o.full_ && row_ptr_ == o.row_ptr_ && cols_ == o.cols_ &&
           values_ == o.values_ && same_patterns;
}

CouplingMatrix generate_couplings(const CouplingSpec& spec, const RngStream& stream) {
    spec.validate();
    const int N = spec.N;
    const double c = spec.scaling_degree();
    const double link_p = spec.full() ? 1.0 : std::min(1.0, c / (N - 1));
    const double mean = spec.J0 / c;
    const double scale = spec.J / std::sqrt(c);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - spec.alpha * spec.alpha));

    Rng rng = stream.engine();
    std::vector<CouplingMatrix::Triplet> entries;
    entries.reserve(static_cast<std::size_t>(2.0 * link_p * N * (N - 1) / 2.0 * 1.05) + 16);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if (!spec.full() && !rng.bernoulli(link_p)) continue;
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double x_ij = z1;
            const double x_ji = spec.alpha * z1 + ortho * z2;
            entries.push_back({i, j, mean + scale * x_ij});
            entries.push_back({j, i, mean + scale * x_ji});
        }
    }
    return CouplingMatrix::from_triplets(N, std::move(entries), spec.full());
}

PatternSet generate_patterns(int N, int p, const RngStream& stream) {
    if (N < 1 || p < 1) throw ParameterError("generate_patterns: N and p must be positive");
    Rng rng = stream.engine();
    PatternSet ps;
    ps.N = N;
    ps.p = p;
    ps.xi.resize(static_cast<std::size_t>(N) * p);
    for (auto& v : ps.xi) v = static_cast<std::int8_t>(rng.sign());
    return ps;
}

CouplingMatrix add_hebbian(const CouplingMatrix& matrix, const PatternSet& patterns) {
    if (!matrix.fully_connected()) {
        throw ParameterError("add_hebbian: the Hebbian part requires a fully connected matrix");
    }
    if (matrix.N() != patterns.N) throw ParameterError("add_hebbian: N mismatch");
    const int N = matrix.N();
    if (matrix.nnz() != static_cast<std::size_t>(N) * (N - 1)) {
        throw ParameterError("add_hebbian: matrix is missing off-diagonal entries");
    }
    CouplingMatrix out = matrix;
    const double inv_n = 1.0 / N;
    for (int i = 0; i < N; ++i) {
        for (std::size_t k = out.row_ptr_[i]; k < out.row_ptr_[i + 1]; ++k) {
            const int j = out.cols_[k];
            int overlap = 0;
            for (int mu = 0; mu < patterns.p; ++mu) overlap += patterns(mu, i) * patterns(mu, j);
            out.values_[k] += inv_n * overlap;
        }
    }
    out.patterns_ = patterns;
    return out;
}

CouplingMatrix build_coupling_matrix(const CouplingSpec& spec, const RngStream& root) {
    CouplingMatrix m = generate_couplings(spec, root.substream("couplings"));
    if (spec.hebbian_p > 0) {
        m = add_hebbian(m, generate_patterns(spec.N, spec.hebbian_p, root.substream("patterns")));
    }
    return m;
}

void save_couplings(const CouplingMatrix& m, const CouplingSpec& spec, std::uint64_t seed,
                    const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    nlohmann::ordered_json header;
    header["N"] = m.N();
    header["seed"] = seed;
    header["spec"] = {{"N", spec.N},
                      {"mean_degree", spec.mean_degree ? nlohmann::ordered_json(*spec.mean_degree)
                                                       : nlohmann::ordered_json("full")},
                      {"J0", spec.J0},
                      {"J", spec.J},
                      {"alpha", spec.alpha},
                      {"hebbian_p", spec.hebbian_p}};
    header["fully_connected"] = m.fully_connected();
    if (m.patterns()) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int mu = 0; mu < m.patterns()->p; ++mu) {
            std::vector<int> r(m.patterns()->row(mu).begin(), m.patterns()->row(mu).end());
            rows.push_back(r);
        }
        header["patterns"] = rows;
    }
    write_file_atomic(json_path, header.dump(2) + "\n");

    CsvWriter csv(csv_path, {"i", "j", "J_ij"});
    const auto rp = m.row_offsets();
    const auto cols = m.columns();
    const auto vals = m.values();
    for (int i = 0; i < m.N(); ++i) {
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            csv.raw_row({std::to_string(i), std::to_string(cols[k]), format17(vals[k])});
        }
    }
    csv.close();
}

CouplingMatrix load_couplings(const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path) {
    const auto header = nlohmann::json::parse(read_file(json_path));
    const int N = header.at("N").get<int>();
    const bool full = header.value("fully_connected", false);
    std::optional<PatternSet> patterns;
    if (header.contains("patterns")) {
        PatternSet ps;
        ps.N = N;
        for (const auto& row : header["patterns"]) {
            for (int v : row.get<std::vector<int>>()) ps.xi.push_back(static_cast<std::int8_t>(v));
            ++ps.p;
        }
        patterns = std::move(ps);
    }
    const CsvTable t = read_csv(csv_path);
    const std::size_t ci = t.column("i"), cj = t.column("j"), cv = t.column("J_ij");
    std::vector<CouplingMatrix::Triplet> entries;
    entries.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        entries.push_back({std::stoi(r[ci]), std::stoi(r[cj]), parse_double(r[cv])});
    }
    return CouplingMatrix::from_triplets(N, std::move(entries), full, std::move(patterns));
}

}  // namespace igbm
