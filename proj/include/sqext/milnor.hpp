#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sqext {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Word in total squares: (i1,...,ik) stands for Sq^{i1}...Sq^{ik}. */
using SqWord = std::vector<int>;

/* Milnor basis element Sq(r1,...,rk); no trailing zeros stored. */
struct MilnorElt {
    std::vector<uint32_t> r;

    static MilnorElt unit() { return MilnorElt{}; }
    static MilnorElt sq(uint32_t k)
    {
        MilnorElt e;
        if (k)
            e.r.push_back(k);
        return e;
    }

    void trim()
    {
        while (!r.empty() && r.back() == 0)
            r.pop_back();
    }

    int degree() const
    {
        long d = 0;
        for (size_t i = 0; i < r.size(); ++i)
            d += long(r[i]) * ((1l << (i + 1)) - 1);
        return int(d);
    }

    bool is_unit() const { return r.empty(); }

    /* lexicographic on zero-padded exponent sequences */
    bool operator<(const MilnorElt& o) const
    {
        size_t n = std::max(r.size(), o.r.size());
        for (size_t i = 0; i < n; ++i) {
            uint32_t a = i < r.size() ? r[i] : 0;
            uint32_t b = i < o.r.size() ? o.r[i] : 0;
            if (a != b)
                return a < b;
        }
        return false;
    }
    bool operator==(const MilnorElt& o) const { return r == o.r; }

    std::string str() const;
};

/* Profile of a sub/quotient range of the algebra we compute in:
** either the finite subalgebra A(p) or the full algebra truncated by degree. */
struct Profile {
    enum class Kind { Finite, FullTruncated };
    Kind kind = Kind::Finite;
    int p = 2;            /* for Finite: A(p) */
    int max_degree = 64;  /* for FullTruncated */

    static Profile A(int p) { return Profile{Kind::Finite, p, 0}; }
    static Profile full(int max_degree) { return Profile{Kind::FullTruncated, 0, max_degree}; }

    /* exponent cap for xi_i (i >= 1): r_i < cap(i) */
    uint64_t cap(size_t i) const
    {
        if (kind == Kind::FullTruncated)
            return std::numeric_limits<uint32_t>::max();
        int e = p + 2 - int(i);
        return e <= 0 ? 1 : (uint64_t(1) << e);
    }

    bool contains(const MilnorElt& m) const
    {
        for (size_t i = 0; i < m.r.size(); ++i)
            if (uint64_t(m.r[i]) >= cap(i + 1))
                return false;
        return true;
    }

    /* top nonzero degree; for truncated profiles the truncation bound */
    int top_degree() const;
    /* total F2-dimension, Finite profiles only */
    long dimension() const;

    bool operator==(const Profile& o) const
    {
        if (kind != o.kind)
            return false;
        return kind == Kind::Finite ? p == o.p : max_degree == o.max_degree;
    }

    std::string name() const;
    static Profile parse(const std::string& s);
};

/* F2-sum of Milnor basis elements of equal degree (or zero). Terms sorted, unique. */
struct SteenrodElt {
    std::vector<MilnorElt> terms;

    bool is_zero() const { return terms.empty(); }
    int degree() const { return terms.empty() ? -1 : terms.front().degree(); }
    std::string str() const;
    bool operator==(const SteenrodElt& o) const { return terms == o.terms; }
};

/* Sort terms and cancel equal pairs (F2 coefficients). */
void normalize(std::vector<MilnorElt>& terms);
SteenrodElt make_elt(std::vector<MilnorElt> terms);

/* binom(n, k) mod 2 via Lucas */
inline bool binom_odd(long long n, long long k)
{
    if (k < 0 || n < 0 || k > n)
        return false;
    return (n & k) == k;
}

/* All Milnor basis elements of the given degree within the profile,
** in lexicographic order on exponent sequences. */
std::vector<MilnorElt> milnor_basis(const Profile& profile, int degree);

/* Milnor matrix product. Inputs must lie in the profile. */
SteenrodElt milnor_product(const MilnorElt& a, const MilnorElt& b, const Profile& profile);
SteenrodElt milnor_product(const SteenrodElt& a, const SteenrodElt& b, const Profile& profile);

/* Adem relation for an inadmissible pair Sq^a Sq^b, 0 < a < 2b:
** the words on the right-hand side (length 1 when c = 0). */
std::vector<SqWord> adem_expand(int a, int b);

/* Normal form of a word in total squares as an F2-sum of admissible words. */
std::vector<SqWord> adem_reduce(const SqWord& word);

bool is_admissible(const SqWord& w);

/* Admissible words of the given degree, lexicographically sorted. */
std::vector<SqWord> admissible_words(int degree);

/* Basis transitions. */
SteenrodElt admissible_to_milnor(const SqWord& word);
std::vector<SqWord> milnor_to_admissible(const SteenrodElt& e);

/* chi(Sq^k) in the Milnor basis */
SteenrodElt antipode_sq(int k);

/* Sq^k as an F2-sum of words in the letters Sq^{2^j}. */
std::vector<SqWord> decompose_sq(int k);

std::string word_str(const SqWord& w);

/* Degree-indexed basis bookkeeping plus a product cache for one profile. */
class AlgebraBasis {
public:
    explicit AlgebraBasis(const Profile& prof) : prof_(prof) {}

    const Profile& profile() const { return prof_; }

    const std::vector<MilnorElt>& basis(int degree) const;
    int dim(int degree) const { return int(basis(degree).size()); }
    int index_of(const MilnorElt& m) const;

    /* product of basis elements (d1,i1)*(d2,i2): indices into basis(d1+d2) */
    const std::vector<int>& product(int d1, int i1, int d2, int i2) const;

private:
    Profile prof_;
    mutable std::map<int, std::vector<MilnorElt>> basis_;
    mutable std::map<int, std::map<std::vector<uint32_t>, int>> index_;
    mutable std::unordered_map<uint64_t, std::vector<int>> prod_;
};

}  // namespace sqext
