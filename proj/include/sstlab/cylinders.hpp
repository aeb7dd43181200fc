#pragma once

// Finite-depth statistics of sequence-space measures.
//
// A process x_i = cell(T^i x) (or a character of one coordinate of T^i x) is
// described by its statistics on index sets I = (o, o+r, ..., o+jr): cell
// probabilities P(x_{I_0} = c_0, ..., x_{I_j} = c_j) or character moments
// E e^{2πi Σ m_l y_{I_l}}. The σ_av construction replaces each statistic at I
// by its Cesàro average over the dilated index sets n I, n = 1..N.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sstlab/correlations.hpp"

namespace sstlab {

/// Thrown when a table lacks the dilated index sets a check needs.
class InsufficientDepth : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Maps one coordinate of a point to a cell of a partition of [0,1) into
/// half-open intervals [b_{c-1}, b_c) with b_{-1} = 0 and b_last = 1.
struct CellCoding {
    int coordinate = 0;
    std::vector<double> breakpoints;  // strictly increasing, inside (0,1)

    int cells() const { return static_cast<int>(breakpoints.size()) + 1; }
    int cell(double y) const;
    std::string describe() const;

    /// 2^levels equal cells.
    static CellCoding dyadic(int coordinate, int levels);
    /// m equal cells; for a sequence space with alphabet m the cells are the symbols.
    static CellCoding uniform(int coordinate, int m);
};

enum class TableKind { Partition, Moments };

/// Which statistics are tabulated.
struct TableSpec {
    TableKind kind = TableKind::Partition;
    CellCoding coding;    // Partition: the cells; Moments: only `coordinate` is used
    int max_freq = 1;     // Moments: frequencies -max_freq..max_freq per position
    int depth = 1;        // index sets have up to depth + 1 positions
    int max_step = 1;     // progression steps r = 1..max_step
    std::vector<std::int64_t> offsets{0, 1};
};

using IndexSet = std::vector<std::int64_t>;

struct CylinderEntry {
    Complex value;
    double std_error = 0.0;
};

struct TableCheckpoint {
    std::int64_t checkpoint = 0;
    double max_change = 0.0;  // max over entries of |value at checkpoint - final value|
};

class CylinderTable {
public:
    TableKind kind = TableKind::Partition;
    int alphabet = 2;          // Partition: number of cells; Moments: 2 max_freq + 1
    std::string coding;        // human-readable description of the coding
    int depth = 1;
    std::int64_t budget = 0;   // independent sample units
    std::uint64_t seed = 0;
    std::int64_t averaged_over = 1;  // N of the Cesàro average (1 for a raw table)
    std::vector<TableCheckpoint> trace;
    /// Values for each index set, in mixed radix of the cell codes (first
    /// position most significant).
    std::map<IndexSet, std::vector<CylinderEntry>> entries;

    bool contains(const IndexSet& I) const { return entries.count(I) != 0; }
    const CylinderEntry& at(const IndexSet& I, std::span<const int> codes) const;
    /// Moments: code c stands for frequency c - max_freq. Partition: the cell.
    int code_value(int code) const;
    int code_of(int value) const;
    int max_freq() const { return kind == TableKind::Moments ? (alphabet - 1) / 2 : 0; }

    bool operator==(const CylinderTable& o) const;
};

/// Index sets (o, o+r, ..., o+jr) for o in offsets, 1 <= r <= max_step, 0 <= j <= depth.
std::vector<IndexSet> progression_family(const TableSpec& spec);

/// Raw statistics of the coded process at the family's index sets.
CylinderTable estimate_cylinders(const SystemSpec& sys, const TableSpec& spec, const MonteCarlo& mc);

/// σ_av statistics: entry at I is (1/N) Σ_{n=1..N} of the base statistic at
/// n I, with `draws` stratified n-values per sample (0 = every n).
CylinderTable sigma_av_build(const SystemSpec& sys, const TableSpec& spec, std::int64_t N, std::int64_t draws,
                             const Method& method);

/// τ_n of a table: result[I] = source[n I] for every I with n I in the source.
CylinderTable dilate(const CylinderTable& table, std::int64_t n);

/// Compares dilate(table, n) to table on the progressions (0, 1, ..., j),
/// 1 <= j <= depth, for 2 <= n <= n_max. Throws InsufficientDepth if some
/// n I is missing. Each entry passes iff deviation <= tol + 3 (se_1 + se_n).
SstReport sigma_av_sst_check(const CylinderTable& table, std::int64_t n_max, double tol);

struct TableCheck {
    double max_deviation = 0.0;
    double std_error_at_max = 0.0;
    std::int64_t compared = 0;
    bool pass = true;
};

/// Stationarity: statistics at I + 1 versus I, for every I with I + 1 in the
/// table. Passes iff each deviation <= tol + 3 (se_a + se_b).
TableCheck stationarity_check(const CylinderTable& table, double tol = 0.0);
/// Partition tables: summing the last cell recovers the shorter index set.
TableCheck marginal_check(const CylinderTable& table, double tol = 0.0);

struct MajorizationRow {
    IndexSet index;
    std::vector<int> cells;
    double sup_base = 0.0;       // max_{n <= N} of the base probability at n I
    std::int64_t sup_at = 0;     // the maximizing n
    double nu = 0.0;
    double margin = 0.0;         // sup_base - nu
    double std_error = 0.0;      // se of sup_base + se of nu
    bool pass = true;            // margin >= -3 std_error
};

struct MajorizationResult {
    CylinderTable nu;
    TableCheck invariance;       // max_{2<=m<=m_check} |τ_m ν - ν|
    std::vector<MajorizationRow> majorization;
    bool majorization_pass = true;
};

inline constexpr std::int64_t kMaxWindow = std::int64_t{1} << 24;

/// ν = (1/N) Σ_{n=1..N} τ_n(base) at depth `depth`, with τ_m invariance
/// checked for m <= m_check (tolerance `tol`) and the cylinder-wise inequality
/// sup_n τ_n(base)(C) >= ν(C). Throws if depth * N * m_check exceeds kMaxWindow.
MajorizationResult majorize_fixed_point(const SystemSpec& sys, const CellCoding& coding, int depth, std::int64_t N,
                                        int m_check, const MonteCarlo& mc, double tol = 1e-2);

/// Versioned text format; doubles are written in shortest round-trip form.
void write_table(std::ostream& out, const CylinderTable& table);
CylinderTable read_table(std::istream& in);

}  // namespace sstlab
