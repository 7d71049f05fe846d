#include "sqext/milnor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace sqext {

std::string MilnorElt::str() const
{
    if (r.empty())
        return "Sq()";
    std::ostringstream os;
    os << "Sq(";
    for (size_t i = 0; i < r.size(); ++i)
        os << (i ? "," : "") << r[i];
    os << ")";
    return os.str();
}

std::string SteenrodElt::str() const
{
    if (terms.empty())
        return "0";
    std::string s;
    for (size_t i = 0; i < terms.size(); ++i)
        s += (i ? " + " : "") + terms[i].str();
    return s;
}

std::string word_str(const SqWord& w)
{
    if (w.empty())
        return "1";
    std::string s;
    for (size_t i = 0; i < w.size(); ++i)
        s += (i ? " " : "") + ("Sq^" + std::to_string(w[i]));
    return s;
}

void normalize(std::vector<MilnorElt>& terms)
{
    std::sort(terms.begin(), terms.end());
    std::vector<MilnorElt> out;
    for (size_t i = 0; i < terms.size();) {
        size_t j = i;
        while (j < terms.size() && terms[j] == terms[i])
            ++j;
        if ((j - i) & 1)
            out.push_back(terms[i]);
        i = j;
    }
    terms.swap(out);
}

SteenrodElt make_elt(std::vector<MilnorElt> terms)
{
    normalize(terms);
    return SteenrodElt{std::move(terms)};
}

int Profile::top_degree() const
{
    if (kind == Kind::FullTruncated)
        return max_degree;
    long d = 0;
    for (int i = 1; i <= p + 1; ++i)
        d += (cap(size_t(i)) - 1) * ((1l << i) - 1);
    return int(d);
}

long Profile::dimension() const
{
    if (kind != Kind::Finite)
        throw InputError("dimension() requires a finite profile");
    long n = 1;
    for (int i = 1; i <= p + 1; ++i)
        n *= long(cap(size_t(i)));
    return n;
}

std::string Profile::name() const
{
    if (kind == Kind::Finite)
        return "A(" + std::to_string(p) + ")";
    return "A[t<=" + std::to_string(max_degree) + "]";
}

Profile Profile::parse(const std::string& s)
{
    if (s.size() >= 4 && s.substr(0, 2) == "A(" && s.back() == ')')
        return Profile::A(std::stoi(s.substr(2, s.size() - 3)));
    if (s.size() >= 2 && s[0] == 'A' && std::isdigit(s[1]))
        return Profile::A(std::stoi(s.substr(1)));
    if (s.rfind("A[t<=", 0) == 0 && s.back() == ']')
        return Profile::full(std::stoi(s.substr(5, s.size() - 6)));
    if (s.rfind("full:", 0) == 0)
        return Profile::full(std::stoi(s.substr(5)));
    throw InputError("cannot parse profile '" + s + "'");
}

namespace {

void enumerate_basis(const Profile& prof, int degree, size_t i, MilnorElt& cur, std::vector<MilnorElt>& out)
{
    if (degree == 0) {
        MilnorElt e = cur;
        e.trim();
        out.push_back(std::move(e));
        return;
    }
    long w = (1l << i) - 1; /* degree of xi_i */
    if (w > degree)
        return;
    uint64_t cap = prof.cap(i);
    for (uint32_t v = 0; long(v) * w <= degree && uint64_t(v) < cap; ++v) {
        cur.r.push_back(v);
        enumerate_basis(prof, degree - int(v) * int(w), i + 1, cur, out);
        cur.r.pop_back();
    }
}

}  // namespace

std::vector<MilnorElt> milnor_basis(const Profile& profile, int degree)
{
    std::vector<MilnorElt> out;
    if (degree < 0)
        return out;
    if (profile.kind == Profile::Kind::FullTruncated && degree > profile.max_degree)
        return out;
    MilnorElt cur;
    enumerate_basis(profile, degree, 1, cur, out);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

/* Recursive enumeration of Milnor matrices.
** rows i = 1..m track the remaining r_i, cols j = 1..n the remaining s_j.
** Entries are visited in row-major order. */
struct MilnorMult {
    size_t m, n;
    std::vector<long> rrem;              /* remaining row budgets r_i - sum 2^j x_ij, i = 1..m */
    std::vector<long> srem;              /* remaining column budgets s_j - sum x_ij, j = 1..n */
    std::vector<std::vector<long>> x;    /* x[i][j], i = 0..m, j = 0..n; x[0][*], x[*][0] filled at flush */
    std::vector<MilnorElt>* out;

    void flush()
    {
        /* x_{i0} = remaining row budget, x_{0j} = remaining column budget */
        for (size_t i = 1; i <= m; ++i)
            x[i][0] = rrem[i];
        for (size_t j = 1; j <= n; ++j)
            x[0][j] = srem[j];
        /* per anti-diagonal: multinomial coefficient mod 2 and entry sum */
        std::vector<uint32_t> t(m + n, 0);
        for (size_t d = 1; d <= m + n; ++d) {
            long acc = 0;
            for (size_t i = d > n ? d - n : 0; i <= std::min(d, m); ++i) {
                size_t j = d - i;
                long e = x[i][j];
                if (acc & e)
                    return; /* even multinomial */
                acc |= e;
            }
            t[d - 1] = uint32_t(acc);
        }
        MilnorElt res;
        res.r = std::move(t);
        res.trim();
        out->push_back(std::move(res));
    }

    void rec(size_t i, size_t j)
    {
        if (i > m) {
            flush();
            return;
        }
        size_t ni = j == n ? i + 1 : i;
        size_t nj = j == n ? 1 : j + 1;
        long hi = std::min(rrem[i] >> j, srem[j]);
        for (long v = 0; v <= hi; ++v) {
            if (v) {
                rrem[i] -= long(1) << j;
                srem[j] -= 1;
            }
            x[i][j] = v;
            rec(ni, nj);
        }
        rrem[i] += (long(hi) << j);
        srem[j] += hi;
        x[i][j] = 0;
    }
};

}  // namespace

SteenrodElt milnor_product(const MilnorElt& a, const MilnorElt& b, const Profile& profile)
{
    if (!profile.contains(a) || !profile.contains(b))
        throw InputError("milnor_product: input outside profile " + profile.name());
    if (profile.kind == Profile::Kind::FullTruncated && a.degree() + b.degree() > profile.max_degree)
        return SteenrodElt{};
    std::vector<MilnorElt> terms;
    if (a.is_unit()) {
        terms.push_back(b);
        return make_elt(std::move(terms));
    }
    if (b.is_unit()) {
        terms.push_back(a);
        return make_elt(std::move(terms));
    }
    MilnorMult mm;
    mm.m = a.r.size();
    mm.n = b.r.size();
    mm.rrem.assign(mm.m + 1, 0);
    mm.srem.assign(mm.n + 1, 0);
    for (size_t i = 1; i <= mm.m; ++i)
        mm.rrem[i] = a.r[i - 1];
    for (size_t j = 1; j <= mm.n; ++j)
        mm.srem[j] = b.r[j - 1];
    mm.x.assign(mm.m + 1, std::vector<long>(mm.n + 1, 0));
    mm.out = &terms;
    mm.rec(1, 1);
    normalize(terms);
    SteenrodElt res{std::move(terms)};
    /* subalgebras are closed under the product; nothing to filter for Finite profiles */
    return res;
}

SteenrodElt milnor_product(const SteenrodElt& a, const SteenrodElt& b, const Profile& profile)
{
    std::vector<MilnorElt> terms;
    for (const auto& x : a.terms)
        for (const auto& y : b.terms) {
            auto p = milnor_product(x, y, profile);
            terms.insert(terms.end(), p.terms.begin(), p.terms.end());
        }
    normalize(terms);
    return SteenrodElt{std::move(terms)};
}

std::vector<SqWord> adem_expand(int a, int b)
{
    if (!(0 < a && a < 2 * b))
        throw InputError("adem_expand: pair (" + std::to_string(a) + "," + std::to_string(b) + ") is admissible");
    std::vector<SqWord> out;
    for (int c = 0; 2 * c <= a; ++c) {
        if (!binom_odd(b - c - 1, a - 2 * c))
            continue;
        SqWord w;
        w.push_back(a + b - c);
        if (c > 0)
            w.push_back(c);
        out.push_back(std::move(w));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_admissible(const SqWord& w)
{
    for (size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i] < 2 * w[i + 1])
            return false;
    return true;
}

std::vector<SqWord> adem_reduce(const SqWord& word)
{
    for (int k : word)
        if (k < 0)
            throw InputError("adem_reduce: negative letter");
    /* multiset of pending words mod 2; rewrite leftmost inadmissible pair */
    std::map<SqWord, int> result;
    std::vector<SqWord> stack;
    {
        SqWord w;
        for (int k : word)
            if (k > 0)
                w.push_back(k); /* Sq^0 = 1 */
        stack.push_back(std::move(w));
    }
    while (!stack.empty()) {
        SqWord w = std::move(stack.back());
        stack.pop_back();
        size_t i = 0;
        while (i + 1 < w.size() && w[i] >= 2 * w[i + 1])
            ++i;
        if (i + 1 >= w.size()) {
            result[w] ^= 1;
            continue;
        }
        for (const SqWord& rhs : adem_expand(w[i], w[i + 1])) {
            SqWord nw(w.begin(), w.begin() + long(i));
            nw.insert(nw.end(), rhs.begin(), rhs.end());
            nw.insert(nw.end(), w.begin() + long(i) + 2, w.end());
            stack.push_back(std::move(nw));
        }
    }
    std::vector<SqWord> out;
    for (auto& [w, c] : result)
        if (c)
            out.push_back(w);
    return out;
}

namespace {

void enum_admissible(int degree, int max_first, SqWord& cur, std::vector<SqWord>& out)
{
    if (degree == 0) {
        out.push_back(cur);
        return;
    }
    for (int i1 = std::min(degree, max_first); i1 >= 1; --i1) {
        /* the remaining letters sum to degree - i1 and the next letter is <= i1/2 */
        cur.push_back(i1);
        enum_admissible(degree - i1, i1 / 2, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<SqWord> admissible_words(int degree)
{
    std::vector<SqWord> out;
    if (degree < 0)
        return out;
    SqWord cur;
    enum_admissible(degree, degree, cur, out);
    std::sort(out.begin(), out.end());
    return out;
}

SteenrodElt admissible_to_milnor(const SqWord& word)
{
    Profile full = Profile::full(std::max(1, 8 * (int(word.size()) + 2)));
    int deg = 0;
    for (int k : word)
        deg += k;
    full.max_degree = deg + 1;
    SteenrodElt acc{{MilnorElt::unit()}};
    for (int k : word)
        acc = milnor_product(acc, SteenrodElt{{MilnorElt::sq(uint32_t(k))}}, full);
    return acc;
}

namespace {

/* Per-degree transition data: admissible words and their Milnor expansions,
** assembled on demand. */
struct Transition {
    std::vector<SqWord> words;
    std::vector<MilnorElt> mbasis;
    std::map<std::vector<uint32_t>, int> mindex;
    /* trans[w] = Milnor support (indices) of word w */
    std::vector<std::vector<int>> rows;
};

const Transition& transition(int degree)
{
    static std::map<int, Transition> cache;
    auto it = cache.find(degree);
    if (it != cache.end())
        return it->second;
    Transition t;
    t.words = admissible_words(degree);
    t.mbasis = milnor_basis(Profile::full(degree), degree);
    for (size_t i = 0; i < t.mbasis.size(); ++i)
        t.mindex[t.mbasis[i].r] = int(i);
    for (const auto& w : t.words) {
        auto e = admissible_to_milnor(w);
        std::vector<int> row;
        for (const auto& m : e.terms)
            row.push_back(t.mindex.at(m.r));
        t.rows.push_back(std::move(row));
    }
    return cache.emplace(degree, std::move(t)).first->second;
}

}  // namespace

std::vector<SqWord> milnor_to_admissible(const SteenrodElt& e)
{
    if (e.is_zero())
        return {};
    int deg = e.terms.front().degree();
    for (const auto& m : e.terms)
        if (m.degree() != deg)
            throw InputError("milnor_to_admissible: mixed-degree input");
    const Transition& t = transition(deg);
    size_t n = t.mbasis.size();
    /* solve x * T = v by forward elimination over the word rows */
    std::vector<std::vector<char>> rows;
    std::vector<std::vector<char>> combos;
    std::vector<int> pivots;
    std::vector<char> v(n, 0);
    for (const auto& m : e.terms)
        v[size_t(t.mindex.at(m.r))] ^= 1;
    auto reduce = [&](std::vector<char>& vec, std::vector<char>& cmb) {
        for (size_t k = 0; k < rows.size(); ++k)
            if (vec[size_t(pivots[k])]) {
                for (size_t j = 0; j < n; ++j)
                    vec[j] ^= rows[k][j];
                for (size_t j = 0; j < t.words.size(); ++j)
                    cmb[j] ^= combos[k][j];
            }
    };
    for (size_t i = 0; i < t.words.size(); ++i) {
        std::vector<char> row(n, 0);
        for (int idx : t.rows[i])
            row[size_t(idx)] ^= 1;
        std::vector<char> cmb(t.words.size(), 0);
        cmb[i] = 1;
        reduce(row, cmb);
        int p = -1;
        for (size_t j = 0; j < n; ++j)
            if (row[j]) {
                p = int(j);
                break;
            }
        if (p >= 0) {
            rows.push_back(std::move(row));
            combos.push_back(std::move(cmb));
            pivots.push_back(p);
        }
    }
    std::vector<char> cmb(t.words.size(), 0);
    reduce(v, cmb);
    for (size_t j = 0; j < n; ++j)
        if (v[j])
            throw InputError("milnor_to_admissible: element not in the span (internal)");
    std::vector<SqWord> out;
    for (size_t j = 0; j < t.words.size(); ++j)
        if (cmb[j])
            out.push_back(t.words[j]);
    std::sort(out.begin(), out.end());
    return out;
}

SteenrodElt antipode_sq(int k)
{
    static std::map<int, SteenrodElt> cache;
    if (k < 0)
        throw InputError("antipode_sq: negative k");
    if (k == 0)
        return SteenrodElt{{MilnorElt::unit()}};
    auto it = cache.find(k);
    if (it != cache.end())
        return it->second;
    /* chi(Sq^k) = sum_{i=1..k} Sq^i chi(Sq^{k-i}) over F2 */
    Profile full = Profile::full(k + 1);
    std::vector<MilnorElt> terms;
    for (int i = 1; i <= k; ++i) {
        auto p = milnor_product(SteenrodElt{{MilnorElt::sq(uint32_t(i))}}, antipode_sq(k - i), full);
        terms.insert(terms.end(), p.terms.begin(), p.terms.end());
    }
    normalize(terms);
    SteenrodElt res{std::move(terms)};
    cache[k] = res;
    return res;
}

std::vector<SqWord> decompose_sq(int k)
{
    static std::map<int, std::vector<SqWord>> cache;
    if (k < 1)
        throw InputError("decompose_sq: k must be positive");
    if ((k & (k - 1)) == 0)
        return {SqWord{k}};
    auto it = cache.find(k);
    if (it != cache.end())
        return it->second;
    int pw = 1;
    while (2 * pw < k)
        pw *= 2;
    int a = k - pw;
    /* Sq^a Sq^pw = Sq^k + sum_{c>=1} binom(pw-c-1, a-2c) Sq^{k-c} Sq^c, and the
    ** leading binomial binom(pw-1, a) is odd, so solve for Sq^k */
    std::map<SqWord, int> acc;
    for (const auto& wa : decompose_sq(a)) {
        SqWord w = wa;
        w.push_back(pw);
        acc[w] ^= 1;
    }
    for (int c = 1; 2 * c <= a; ++c) {
        if (!binom_odd(pw - c - 1, a - 2 * c))
            continue;
        for (const auto& wl : decompose_sq(k - c))
            for (const auto& wr : decompose_sq(c)) {
                SqWord w = wl;
                w.insert(w.end(), wr.begin(), wr.end());
                acc[w] ^= 1;
            }
    }
    std::vector<SqWord> out;
    for (auto& [w, cnt] : acc)
        if (cnt)
            out.push_back(w);
    cache[k] = out;
    return out;
}

const std::vector<MilnorElt>& AlgebraBasis::basis(int degree) const
{
    auto it = basis_.find(degree);
    if (it != basis_.end())
        return it->second;
    auto b = milnor_basis(prof_, degree);
    auto& slot = basis_[degree];
    slot = std::move(b);
    auto& idx = index_[degree];
    for (size_t i = 0; i < slot.size(); ++i)
        idx[slot[i].r] = int(i);
    return slot;
}

int AlgebraBasis::index_of(const MilnorElt& m) const
{
    int d = m.degree();
    basis(d);
    auto& idx = index_.at(d);
    auto it = idx.find(m.r);
    if (it == idx.end())
        throw InputError("AlgebraBasis::index_of: element " + m.str() + " not in " + prof_.name());
    return it->second;
}

const std::vector<int>& AlgebraBasis::product(int d1, int i1, int d2, int i2) const
{
    uint64_t key = ((uint64_t(d1) & 0xffff) << 48) | ((uint64_t(i1) & 0xffff) << 32) | ((uint64_t(d2) & 0xffff) << 16) |
                   (uint64_t(i2) & 0xffff);
    auto it = prod_.find(key);
    if (it != prod_.end())
        return it->second;
    const auto& a = basis(d1)[size_t(i1)];
    const auto& b = basis(d2)[size_t(i2)];
    auto e = milnor_product(a, b, prof_);
    std::vector<int> out;
    for (const auto& m : e.terms)
        out.push_back(index_of(m));
    return prod_.emplace(key, std::move(out)).first->second;
}

}  // namespace sqext
