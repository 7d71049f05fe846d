#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace sqext {

using BitVec = std::vector<uint64_t>;

inline size_t bv_words(size_t bits)
{
    return (bits + 63) / 64;
}

inline bool bv_get(const BitVec& v, size_t j)
{
    return (v[j >> 6] >> (j & 63)) & 1;
}

inline void bv_set(BitVec& v, size_t j)
{
    v[j >> 6] |= uint64_t(1) << (j & 63);
}

inline void bv_flip(BitVec& v, size_t j)
{
    v[j >> 6] ^= uint64_t(1) << (j & 63);
}

inline void bv_xor(BitVec& dst, const BitVec& src)
{
    for (size_t w = 0; w < src.size(); ++w)
        dst[w] ^= src[w];
}

inline bool bv_is_zero(const BitVec& v)
{
    for (uint64_t w : v)
        if (w)
            return false;
    return true;
}

/* Index of the lowest set bit, or -1 if zero. */
inline long bv_lowest(const BitVec& v)
{
    for (size_t w = 0; w < v.size(); ++w)
        if (v[w])
            return long(w * 64 + size_t(__builtin_ctzll(v[w])));
    return -1;
}

inline std::vector<int> bv_support(const BitVec& v)
{
    std::vector<int> out;
    for (size_t w = 0; w < v.size(); ++w) {
        uint64_t x = v[w];
        while (x) {
            out.push_back(int(w * 64 + size_t(__builtin_ctzll(x))));
            x &= x - 1;
        }
    }
    return out;
}

/* Dense GF(2) matrix, rows packed into 64-bit words. */
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), words_(bv_words(cols)), data_(rows * words_, 0) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t words() const { return words_; }

    uint64_t* row(size_t i) { return data_.data() + i * words_; }
    const uint64_t* row(size_t i) const { return data_.data() + i * words_; }

    bool get(size_t i, size_t j) const { return (row(i)[j >> 6] >> (j & 63)) & 1; }
    void set(size_t i, size_t j) { row(i)[j >> 6] |= uint64_t(1) << (j & 63); }
    void flip(size_t i, size_t j) { row(i)[j >> 6] ^= uint64_t(1) << (j & 63); }

    void xor_rows(size_t dst, size_t src)
    {
        uint64_t* d = row(dst);
        const uint64_t* s = row(src);
        for (size_t w = 0; w < words_; ++w)
            d[w] ^= s[w];
    }

    BitVec row_vec(size_t i) const { return BitVec(row(i), row(i) + words_); }

    void set_row(size_t i, const BitVec& v)
    {
        for (size_t w = 0; w < words_; ++w)
            row(i)[w] = v[w];
    }

    void append_row(const BitVec& v)
    {
        data_.insert(data_.end(), v.begin(), v.end());
        ++rows_;
    }

    void append_zero_row()
    {
        data_.insert(data_.end(), words_, 0);
        ++rows_;
    }

private:
    size_t rows_ = 0, cols_ = 0, words_ = 0;
    std::vector<uint64_t> data_;
};

/* Incrementally maintained row space in reduced echelon form.
** Rows are kept fully reduced against each other; pivot per row is the
** lowest set bit. Insertion order is deterministic. */
class EchelonBasis {
public:
    explicit EchelonBasis(size_t cols) : cols_(cols), words_(bv_words(cols)) {}

    size_t dim() const { return rows_.size(); }
    size_t cols() const { return cols_; }

    /* Reduce v against the basis in place. */
    void reduce(BitVec& v) const
    {
        for (size_t k = 0; k < rows_.size(); ++k)
            if (bv_get(v, size_t(pivots_[k])))
                bv_xor(v, rows_[k]);
    }

    /* Reduce and insert if independent. Returns true if v enlarged the space. */
    bool insert(BitVec v)
    {
        reduce(v);
        long p = bv_lowest(v);
        if (p < 0)
            return false;
        for (size_t k = 0; k < rows_.size(); ++k)
            if (bv_get(rows_[k], size_t(p)))
                bv_xor(rows_[k], v);
        rows_.push_back(std::move(v));
        pivots_.push_back(p);
        return true;
    }

    const std::vector<BitVec>& rows() const { return rows_; }

private:
    size_t cols_, words_;
    std::vector<BitVec> rows_;
    std::vector<long> pivots_;
};

/* Rank of M. */
inline size_t rank(const BitMatrix& m)
{
    EchelonBasis e(m.cols() ? m.cols() : 1);
    size_t r = 0;
    for (size_t i = 0; i < m.rows(); ++i)
        if (e.insert(m.row_vec(i)))
            ++r;
    return r;
}

/* Basis of the left kernel {x : x M = 0}, rows of the returned matrix.
** Deterministic given row order of M. */
inline BitMatrix left_kernel(const BitMatrix& m)
{
    size_t R = m.rows();
    BitMatrix ker(0, R);
    std::vector<BitVec> rows;
    std::vector<BitVec> combo;
    std::vector<long> pivots;
    size_t tw = bv_words(R ? R : 1);
    for (size_t i = 0; i < R; ++i) {
        BitVec v = m.row_vec(i);
        BitVec c(tw, 0);
        bv_set(c, i);
        for (size_t k = 0; k < rows.size(); ++k)
            if (bv_get(v, size_t(pivots[k]))) {
                bv_xor(v, rows[k]);
                bv_xor(c, combo[k]);
            }
        long p = bv_lowest(v);
        if (p < 0) {
            ker.append_row(c);
        }
        else {
            rows.push_back(std::move(v));
            combo.push_back(std::move(c));
            pivots.push_back(p);
        }
    }
    return ker;
}

/* Solves x M = b repeatedly for fixed M. */
class RowSolver {
public:
    explicit RowSolver(const BitMatrix& m) : nrows_(m.rows()), tw_(bv_words(m.rows() ? m.rows() : 1))
    {
        for (size_t i = 0; i < m.rows(); ++i) {
            BitVec v = m.row_vec(i);
            BitVec c(tw_, 0);
            bv_set(c, i);
            reduce_pair(v, c);
            long p = bv_lowest(v);
            if (p >= 0) {
                rows_.push_back(std::move(v));
                combos_.push_back(std::move(c));
                pivots_.push_back(p);
            }
        }
    }

    size_t nrows() const { return nrows_; }

    /* Returns x with x M = b, or nullopt if b is not in the row space. */
    std::optional<BitVec> solve(BitVec b) const
    {
        BitVec c(tw_, 0);
        reduce_pair(b, c);
        if (!bv_is_zero(b))
            return std::nullopt;
        return c;
    }

private:
    void reduce_pair(BitVec& v, BitVec& c) const
    {
        for (size_t k = 0; k < rows_.size(); ++k)
            if (pivots_[k] >= 0 && bv_get(v, size_t(pivots_[k]))) {
                bv_xor(v, rows_[k]);
                bv_xor(c, combos_[k]);
            }
    }

    size_t nrows_, tw_;
    std::vector<BitVec> rows_;
    std::vector<BitVec> combos_;
    std::vector<long> pivots_;
};

}  // namespace sqext
