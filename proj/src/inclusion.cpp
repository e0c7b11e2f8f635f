#include "regincl/inclusion.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace regincl {

IntMatrix int_matrix(const std::vector<std::vector<Int>> &rows) {
    const auto s = static_cast<Index>(rows.size());
    const auto r = s == 0 ? Index{0} : static_cast<Index>(rows.front().size());
    IntMatrix m(s, r);
    for (Index i = 0; i < s; ++i) {
        const auto &row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Index>(row.size()) != r)
            throw ValidationError("ragged matrix: row " + std::to_string(i) + " has " +
                                      std::to_string(row.size()) + " entries, expected " +
                                      std::to_string(r),
                                  "inclusion_matrix[" + std::to_string(i) + "]");
        for (Index j = 0; j < r; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
}

IntMatrix int_matrix(std::initializer_list<std::initializer_list<Int>> rows) {
    std::vector<std::vector<Int>> v;
    for (const auto &row : rows) v.emplace_back(row);
    return int_matrix(v);
}

bool is_irredundant(const IntMatrix &m) {
    if (m.rows() == 0 || m.cols() == 0) return false;
    if ((m.array() < 0).any()) return false;
    for (Index i = 0; i < m.rows(); ++i)
        if ((m.row(i).array() == 0).all()) return false;
    for (Index j = 0; j < m.cols(); ++j)
        if ((m.col(j).array() == 0).all()) return false;
    return true;
}

InclusionMatrix::InclusionMatrix(IntMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
        throw ValidationError("inclusion matrix must have at least one row and one column",
                              "inclusion_matrix");
    for (Index i = 0; i < entries_.rows(); ++i)
        for (Index j = 0; j < entries_.cols(); ++j)
            if (entries_(i, j) < 0)
                throw ValidationError("negative multiplicity " + std::to_string(entries_(i, j)),
                                      "inclusion_matrix[" + std::to_string(i) + "][" +
                                          std::to_string(j) + "]");
    for (Index i = 0; i < entries_.rows(); ++i)
        if ((entries_.row(i).array() == 0).all())
            throw ValidationError("row " + std::to_string(i) +
                                      " is zero (the embedding would not be unital)",
                                  "inclusion_matrix[" + std::to_string(i) + "]");
    for (Index j = 0; j < entries_.cols(); ++j)
        if ((entries_.col(j).array() == 0).all())
            throw ValidationError("column " + std::to_string(j) +
                                      " is zero (summand of B not embedded)",
                                  "inclusion_matrix[*][" + std::to_string(j) + "]");
}

DimensionVector::DimensionVector(std::vector<Int> dims) : dims_(std::move(dims)) {
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i] < 1)
            throw ValidationError("dimension " + std::to_string(dims_[i]) + " is not positive",
                                  "[" + std::to_string(i) + "]");
}

IntVector DimensionVector::as_vector() const {
    IntVector v(size());
    for (Index i = 0; i < size(); ++i) v(i) = (*this)[i];
    return v;
}

InclusionDescriptor validate_descriptor(const InclusionMatrix &matrix, const DimensionVector &b_dims) {
    if (b_dims.size() != matrix.cols())
        throw ValidationError("b_dims has length " + std::to_string(b_dims.size()) +
                                  " but the inclusion matrix has " +
                                  std::to_string(matrix.cols()) + " columns",
                              "b_dims");
    const IntVector n = matrix.entries() * b_dims.as_vector();
    return InclusionDescriptor{matrix, b_dims, DimensionVector(std::vector<Int>(n.begin(), n.end()))};
}

std::vector<RowSupport> row_supports(const InclusionMatrix &matrix) {
    std::vector<RowSupport> out;
    out.reserve(static_cast<std::size_t>(matrix.rows()));
    for (Index i = 0; i < matrix.rows(); ++i) {
        RowSupport rs{i, {}};
        for (Index j = 0; j < matrix.cols(); ++j)
            if (matrix(i, j) != 0) rs.support.push_back(j);
        out.push_back(std::move(rs));
    }
    return out;
}

namespace {

std::optional<PartitionViolation> smallest_violation(const InclusionMatrix &a) {
    const Index s = a.rows(), r = a.cols();
    for (Index i = 0; i < s; ++i)
        for (Index k = 0; k < s; ++k)
            for (Index j = 0; j < r; ++j) {
                if (a(i, j) != 0 || a(k, j) == 0) continue;
                for (Index l = 0; l < r; ++l)
                    if (a(i, l) != 0 && a(k, l) != 0) return PartitionViolation{i, k, j, l};
            }
    return std::nullopt;
}

std::optional<UnequalRowEntries> first_unequal_row(const InclusionMatrix &a) {
    for (Index i = 0; i < a.rows(); ++i) {
        Index first = -1;
        for (Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) == 0) continue;
            if (first < 0)
                first = j;
            else if (a(i, j) != a(i, first))
                return UnequalRowEntries{i, first, j};
        }
    }
    return std::nullopt;
}

} // namespace

PartitionResult check_support_partition(const InclusionMatrix &matrix) {
    const auto supports = row_supports(matrix);
    std::map<std::vector<Index>, std::size_t> class_of;
    SupportPartition partition;
    for (const auto &rs : supports) {
        auto [it, inserted] = class_of.emplace(rs.support, partition.classes.size());
        if (inserted) partition.classes.push_back(SupportClass{{}, rs.support});
        partition.classes[it->second].rows.push_back(rs.row);
    }
    // Distinct supports must be disjoint.
    std::vector<Index> owner(static_cast<std::size_t>(matrix.cols()), -1);
    for (std::size_t c = 0; c < partition.classes.size(); ++c)
        for (Index j : partition.classes[c].cols) {
            auto &o = owner[static_cast<std::size_t>(j)];
            if (o >= 0) return *smallest_violation(matrix);
            o = static_cast<Index>(c);
        }
    return partition;
}

NormalizerCheck is_normalizer_matrix(const InclusionMatrix &matrix) {
    if (auto bad = first_unequal_row(matrix)) {
        FailureWitness w = *bad;
        return {false, w, "row entries unequal: " + describe(w)};
    }
    auto part = check_support_partition(matrix);
    if (auto *v = std::get_if<PartitionViolation>(&part)) {
        FailureWitness w = *v;
        return {false, w, "row supports do not partition: " + describe(w)};
    }
    return {true, std::nullopt, "normalizer matrix"};
}

std::string describe(const FailureWitness &witness) {
    std::ostringstream os;
    std::visit(
        [&](const auto &w) {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, UnequalRowEntries>)
                os << "row " << w.row << " has distinct nonzero entries in columns " << w.col
                   << " and " << w.other_col;
            else if constexpr (std::is_same_v<T, PartitionViolation>)
                os << "rows " << w.i << " and " << w.k << " have overlapping unequal supports (a["
                   << w.i << "][" << w.j << "]=0, a[" << w.k << "][" << w.j << "]!=0, a[" << w.i
                   << "][" << w.l << "]!=0, a[" << w.k << "][" << w.l << "]!=0)";
            else
                os << "columns " << w.col << " and " << w.other_col << " in the support of row "
                   << w.row << " have different B-summand dimensions";
        },
        witness);
    return os.str();
}

bool witness_holds(const InclusionMatrix &a, const FailureWitness &witness) {
    auto in = [&](Index i, Index j) { return i >= 0 && j >= 0 && i < a.rows() && j < a.cols(); };
    if (const auto *w = std::get_if<UnequalRowEntries>(&witness))
        return in(w->row, w->col) && in(w->row, w->other_col) && a(w->row, w->col) != 0 &&
               a(w->row, w->other_col) != 0 && a(w->row, w->col) != a(w->row, w->other_col);
    if (const auto *w = std::get_if<PartitionViolation>(&witness))
        return in(w->i, w->j) && in(w->k, w->l) && a(w->i, w->j) == 0 && a(w->k, w->j) != 0 &&
               a(w->i, w->l) != 0 && a(w->k, w->l) != 0;
    return false;
}

bool witness_holds(const InclusionDescriptor &d, const FailureWitness &witness) {
    if (const auto *w = std::get_if<UnequalDimensions>(&witness)) {
        const auto &a = d.matrix;
        if (w->row < 0 || w->row >= a.rows() || w->col < 0 || w->col >= a.cols() ||
            w->other_col < 0 || w->other_col >= a.cols())
            return false;
        return a(w->row, w->col) != 0 && a(w->row, w->other_col) != 0 &&
               d.b_dims[w->col] != d.b_dims[w->other_col];
    }
    return witness_holds(d.matrix, witness);
}

NotNormalizerError::NotNormalizerError(FailureWitness witness)
    : PreconditionError("not a normalizer matrix: " + describe(witness)), witness_(witness) {}

IntMatrix CanonicalBlock::entries() const {
    IntMatrix m(s(), r());
    for (Index i = 0; i < s(); ++i) m.row(i).setConstant(row_values[static_cast<std::size_t>(i)]);
    return m;
}

IntMatrix CanonicalForm::block_diagonal() const {
    Index s = 0, r = 0;
    for (const auto &b : blocks) s += b.s(), r += b.r();
    IntMatrix m = IntMatrix::Zero(s, r);
    Index i0 = 0, j0 = 0;
    for (const auto &b : blocks) {
        m.block(i0, j0, b.s(), b.r()) = b.entries();
        i0 += b.s();
        j0 += b.r();
    }
    return m;
}

CanonicalForm canonicalize(const InclusionMatrix &matrix) {
    auto check = is_normalizer_matrix(matrix);
    if (!check) throw NotNormalizerError(*check.failure);

    auto partition = std::get<SupportPartition>(check_support_partition(matrix));
    CanonicalForm form;
    for (auto &cls : partition.classes) {
        CanonicalBlock block;
        block.rows = cls.rows;
        block.cols = cls.cols;
        for (Index i : cls.rows) block.row_values.push_back(matrix(i, cls.cols.front()));
        form.row_perm.insert(form.row_perm.end(), cls.rows.begin(), cls.rows.end());
        form.col_perm.insert(form.col_perm.end(), cls.cols.begin(), cls.cols.end());
        form.blocks.push_back(std::move(block));
    }
    return form;
}

IntMatrix permute(const IntMatrix &m, const std::vector<Index> &row_perm,
                  const std::vector<Index> &col_perm) {
    if (!is_permutation(row_perm, m.rows()) || !is_permutation(col_perm, m.cols()))
        throw ShapeError("permute: invalid permutation for a " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix");
    IntMatrix out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            out(i, j) = m(row_perm[static_cast<std::size_t>(i)], col_perm[static_cast<std::size_t>(j)]);
    return out;
}

bool is_permutation(const std::vector<Index> &perm, Index n) {
    if (static_cast<Index>(perm.size()) != n) return false;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) return false;
        seen[static_cast<std::size_t>(p)] = true;
    }
    return true;
}

std::vector<Index> inverse_permutation(const std::vector<Index> &perm) {
    std::vector<Index> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<Index>(i);
    return inv;
}

namespace {

using Tuple = std::vector<Int>;

std::vector<Int> sorted_col(const IntMatrix &m, Index j) {
    std::vector<Int> v(m.col(j).begin(), m.col(j).end());
    std::sort(v.begin(), v.end());
    return v;
}

class ColumnMatcher {
  public:
    ColumnMatcher(const IntMatrix &a, const IntMatrix &b) : a_(a), b_(b) {
        used_.assign(static_cast<std::size_t>(a.cols()), false);
        a_prefix_.assign(static_cast<std::size_t>(a.rows()), {});
        b_prefix_.assign(static_cast<std::size_t>(b.rows()), {});
        for (Index j = 0; j < a.cols(); ++j) {
            a_cols_.push_back(sorted_col(a, j));
            b_cols_.push_back(sorted_col(b, j));
        }
    }

    bool search(Index c) {
        if (c == b_.cols()) return true;
        for (Index cand = 0; cand < a_.cols(); ++cand) {
            const auto uc = static_cast<std::size_t>(cand);
            if (used_[uc] || a_cols_[uc] != b_cols_[static_cast<std::size_t>(c)]) continue;
            extend(cand, c);
            if (prefixes_match() && search(c + 1)) return true;
            retract();
        }
        return false;
    }

    std::vector<Index> col_perm;

  private:
    void extend(Index a_col, Index b_col) {
        used_[static_cast<std::size_t>(a_col)] = true;
        col_perm.push_back(a_col);
        for (Index i = 0; i < a_.rows(); ++i) a_prefix_[static_cast<std::size_t>(i)].push_back(a_(i, a_col));
        for (Index i = 0; i < b_.rows(); ++i) b_prefix_[static_cast<std::size_t>(i)].push_back(b_(i, b_col));
    }

    void retract() {
        used_[static_cast<std::size_t>(col_perm.back())] = false;
        col_perm.pop_back();
        for (auto &t : a_prefix_) t.pop_back();
        for (auto &t : b_prefix_) t.pop_back();
    }

    // Row-multiset pruning on the assigned columns.
    bool prefixes_match() const {
        auto x = a_prefix_, y = b_prefix_;
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        return x == y;
    }

    const IntMatrix &a_;
    const IntMatrix &b_;
    std::vector<bool> used_;
    std::vector<std::vector<Int>> a_cols_, b_cols_;
    std::vector<Tuple> a_prefix_, b_prefix_;
};

} // namespace

std::optional<PseudoEquivalence> find_pseudo_equivalence(const IntMatrix &a, const IntMatrix &b) {
    for (const auto *m : {&a, &b})
        if (m->rows() > kPseudoEquivalenceMaxSide || m->cols() > kPseudoEquivalenceMaxSide)
            throw SizeLimitError("pseudo-equivalence search is limited to " +
                                 std::to_string(kPseudoEquivalenceMaxSide) + "x" +
                                 std::to_string(kPseudoEquivalenceMaxSide) + " matrices");
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::nullopt;

    ColumnMatcher matcher(a, b);
    if (!matcher.search(0)) return std::nullopt;

    // Full row tuples agree as multisets; pair equal rows greedily.
    PseudoEquivalence eq;
    eq.col_perm = matcher.col_perm;
    std::vector<bool> used(static_cast<std::size_t>(a.rows()), false);
    for (Index i = 0; i < b.rows(); ++i) {
        for (Index k = 0; k < a.rows(); ++k) {
            if (used[static_cast<std::size_t>(k)]) continue;
            bool same = true;
            for (Index j = 0; j < b.cols() && same; ++j)
                same = b(i, j) == a(k, eq.col_perm[static_cast<std::size_t>(j)]);
            if (same) {
                used[static_cast<std::size_t>(k)] = true;
                eq.row_perm.push_back(k);
                break;
            }
        }
    }
    return eq;
}

bool pseudo_equivalent(const IntMatrix &a, const IntMatrix &b) {
    return find_pseudo_equivalence(a, b).has_value();
}

} // namespace regincl
