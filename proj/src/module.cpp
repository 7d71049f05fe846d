#include "sqext/module.hpp"

#include <algorithm>
#include <sstream>

namespace sqext {

std::vector<int> sym_merge(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

int ModulePresentation::min_degree() const
{
    return degrees.empty() ? 0 : *std::min_element(degrees.begin(), degrees.end());
}

int ModulePresentation::max_degree() const
{
    return degrees.empty() ? 0 : *std::max_element(degrees.begin(), degrees.end());
}

bool ModulePresentation::equivalent(const ModulePresentation& o) const
{
    if (degrees != o.degrees)
        return false;
    auto key = [](const ModulePresentation& m) {
        std::map<std::pair<int, int>, std::vector<int>> k;
        for (const auto& a : m.actions) {
            auto t = a.targets;
            std::sort(t.begin(), t.end());
            k[{a.gen, a.k}] = t;
        }
        return k;
    };
    return key(*this) == key(o);
}

ModulePresentation parse_def(const std::string& text)
{
    ModulePresentation m;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    int n = -1;
    bool have_degrees = false;
    std::map<std::pair<int, int>, int> seen; /* (i,k) -> line */
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<long> nums;
        std::string tok;
        while (ls >> tok) {
            try {
                size_t pos = 0;
                long v = std::stol(tok, &pos);
                if (pos != tok.size())
                    throw std::invalid_argument(tok);
                nums.push_back(v);
            }
            catch (const std::exception&) {
                throw ParseError(lineno, "malformed integer '" + tok + "'");
            }
        }
        if (nums.empty())
            continue; /* blank line */
        if (n < 0) {
            if (nums.size() != 1 || nums[0] <= 0)
                throw ParseError(lineno, "expected a single positive dimension");
            n = int(nums[0]);
            continue;
        }
        if (!have_degrees) {
            if (int(nums.size()) != n)
                throw ParseError(lineno, "expected " + std::to_string(n) + " degrees, got " + std::to_string(nums.size()));
            m.degrees.assign(nums.begin(), nums.end());
            have_degrees = true;
            continue;
        }
        if (nums.size() < 3)
            throw ParseError(lineno, "action line needs at least 'i k l'");
        long i = nums[0], k = nums[1], l = nums[2];
        if (i < 0 || i >= n)
            throw ParseError(lineno, "generator index " + std::to_string(i) + " out of range [0," + std::to_string(n) + ")");
        if (k <= 0)
            throw ParseError(lineno, "square degree must be positive");
        if (l <= 0 || int(nums.size()) != 3 + l)
            throw ParseError(lineno, "target count " + std::to_string(l) + " does not match the line");
        ActionRecord rec;
        rec.gen = int(i);
        rec.k = int(k);
        for (size_t j = 3; j < nums.size(); ++j) {
            if (nums[j] < 0 || nums[j] >= n)
                throw ParseError(lineno, "target index " + std::to_string(nums[j]) + " out of range");
            rec.targets.push_back(int(nums[j]));
        }
        std::sort(rec.targets.begin(), rec.targets.end());
        if (std::adjacent_find(rec.targets.begin(), rec.targets.end()) != rec.targets.end())
            throw ParseError(lineno, "duplicate target index");
        auto dup = seen.emplace(std::make_pair(rec.gen, rec.k), lineno);
        if (!dup.second)
            throw ParseError(lineno, "duplicate action line for (i,k) = (" + std::to_string(i) + "," + std::to_string(k) +
                                         "), first at line " + std::to_string(dup.first->second));
        m.actions.push_back(std::move(rec));
    }
    if (n < 0)
        throw ParseError(lineno, "missing dimension line");
    if (!have_degrees)
        throw ParseError(lineno, "missing degree line");
    return m;
}

std::string serialize_def(const ModulePresentation& m)
{
    std::ostringstream os;
    os << m.dim() << "\n\n";
    for (size_t i = 0; i < m.degrees.size(); ++i)
        os << (i ? " " : "") << m.degrees[i];
    os << "\n\n";
    auto recs = m.actions;
    std::sort(recs.begin(), recs.end(), [](const ActionRecord& a, const ActionRecord& b) {
        return std::tie(a.gen, a.k) < std::tie(b.gen, b.k);
    });
    for (const auto& r : recs) {
        os << r.gen << " " << r.k << " " << r.targets.size();
        for (int t : r.targets)
            os << " " << t;
        os << "\n";
    }
    return os.str();
}

namespace {

/* degree-check one record; returns offending target or -1 */
int degree_violation(const ModulePresentation& m, const ActionRecord& r)
{
    for (int t : r.targets)
        if (m.degrees[size_t(t)] != m.degrees[size_t(r.gen)] + r.k)
            return t;
    return -1;
}

}  // namespace

ActionTable ActionTable::complete(const ModulePresentation& m, CompletionMode mode, int max_k)
{
    ActionTable tab;
    tab.name = m.name;
    tab.degrees = m.degrees;
    tab.min_deg_ = m.min_degree();
    tab.max_deg_ = m.max_degree();
    int span = tab.max_deg_ - tab.min_deg_;
    if (max_k < 0 || max_k > span)
        max_k = span;
    for (int i = 0; i < m.dim(); ++i)
        tab.by_degree_[m.degrees[size_t(i)]].push_back(i);

    for (const auto& r : m.actions) {
        int bad = degree_violation(m, r);
        if (bad >= 0)
            throw CompletionError(r.gen, r.k, "degree of target " + std::to_string(bad) + " is not d_i + k");
    }

    tab.sq_.assign(size_t(max_k) + 1, std::vector<std::vector<int>>(size_t(m.dim())));
    auto from_records = [&](int k) {
        for (const auto& r : m.actions)
            if (r.k == k && k <= max_k)
                tab.sq_[size_t(k)][size_t(r.gen)] = r.targets;
    };

    if (mode == CompletionMode::Strict) {
        for (int k = 1; k <= max_k; ++k)
            from_records(k);
        return tab;
    }

    /* generate mode: 2-power actions are the data, the rest is derived */
    for (int k = 1; k <= max_k; k *= 2)
        from_records(k);
    for (int k = 1; k <= max_k; ++k) {
        if ((k & (k - 1)) == 0)
            continue;
        for (const auto& w : decompose_sq(k)) {
            for (int i = 0; i < m.dim(); ++i) {
                auto img = tab.apply_word(w, {i});
                if (!img.empty())
                    tab.sq_[size_t(k)][size_t(i)] = sym_merge(tab.sq_[size_t(k)][size_t(i)], img);
            }
        }
    }
    /* listed non-2-power lines must agree with the derived action */
    for (const auto& r : m.actions) {
        if ((r.k & (r.k - 1)) == 0 || r.k > max_k)
            continue;
        if (tab.sq_[size_t(r.k)][size_t(r.gen)] != r.targets)
            throw CompletionError(r.gen, r.k, "listed action disagrees with the one derived from 2-power actions");
    }
    return tab;
}

static const std::vector<int> kEmpty;

const std::vector<int>& ActionTable::sq(int k, int gen) const
{
    if (k == 0)
        throw InputError("ActionTable::sq: k = 0");
    if (k < 0 || k >= int(sq_.size()))
        return kEmpty;
    return sq_[size_t(k)][size_t(gen)];
}

std::vector<int> ActionTable::apply_sq(int k, const std::vector<int>& v) const
{
    std::vector<int> out;
    for (int g : v)
        out = sym_merge(out, sq(k, g));
    return out;
}

std::vector<int> ActionTable::apply_word(const SqWord& w, const std::vector<int>& v) const
{
    std::vector<int> cur = v;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        if (cur.empty())
            return cur;
        cur = apply_sq(*it, cur);
    }
    return cur;
}

const std::vector<std::vector<int>>& ActionTable::milnor_rows(const MilnorElt& m) const
{
    auto it = milnor_cache_.find(m.r);
    if (it != milnor_cache_.end())
        return it->second;
    std::vector<std::vector<int>> rows(size_t(dim()));
    if (m.is_unit()) {
        for (int i = 0; i < dim(); ++i)
            rows[size_t(i)] = {i};
    }
    else {
        auto words = milnor_to_admissible(SteenrodElt{{m}});
        for (int i = 0; i < dim(); ++i) {
            std::vector<int> acc;
            for (const auto& w : words)
                acc = sym_merge(acc, apply_word(w, {i}));
            rows[size_t(i)] = std::move(acc);
        }
    }
    return milnor_cache_.emplace(m.r, std::move(rows)).first->second;
}

const std::vector<int>& ActionTable::gens_in_degree(int d) const
{
    auto it = by_degree_.find(d);
    return it == by_degree_.end() ? kEmpty : it->second;
}

uint64_t ActionTable::content_hash() const
{
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(uint64_t(dim()));
    for (int d : degrees)
        mix(uint64_t(uint32_t(d)) + 0x9e3779b9u);
    for (size_t k = 1; k < sq_.size(); ++k)
        for (size_t i = 0; i < sq_[k].size(); ++i)
            for (int t : sq_[k][i]) {
                mix(k);
                mix(i);
                mix(uint64_t(t));
            }
    return h;
}

std::string ConsistencyViolation::str() const
{
    std::ostringstream os;
    switch (kind) {
        case Kind::Degree:
            os << "degree check failed at generator " << gen << ": " << detail;
            break;
        case Kind::Adem:
            os << "Adem relation Sq^" << a << " Sq^" << b << " violated on generator " << gen << ": " << detail;
            break;
        case Kind::Completion:
            os << "completion conflict: " << detail;
            break;
    }
    return os.str();
}

std::string ConsistencyReport::str() const
{
    if (ok())
        return "consistent\n";
    std::string s;
    for (const auto& v : violations)
        s += v.str() + "\n";
    return s;
}

ConsistencyReport check_consistency(const ModulePresentation& m, CompletionMode mode)
{
    ConsistencyReport rep;
    for (const auto& r : m.actions) {
        int bad = degree_violation(m, r);
        if (bad >= 0) {
            ConsistencyViolation v;
            v.kind = ConsistencyViolation::Kind::Degree;
            v.gen = r.gen;
            v.a = r.k;
            v.detail = "target " + std::to_string(bad) + " has degree " + std::to_string(m.degrees[size_t(bad)]) +
                       ", expected " + std::to_string(m.degrees[size_t(r.gen)] + r.k);
            rep.violations.push_back(std::move(v));
        }
    }
    if (!rep.ok())
        return rep;

    ActionTable tab;
    try {
        tab = ActionTable::complete(m, mode);
    }
    catch (const CompletionError& e) {
        ConsistencyViolation v;
        v.kind = ConsistencyViolation::Kind::Completion;
        v.gen = e.gen;
        v.a = e.k;
        v.detail = e.what();
        rep.violations.push_back(std::move(v));
        return rep;
    }

    int span = m.span();
    for (int b = 1; b <= span; ++b) {
        for (int a = 1; a < 2 * b && a + b <= span; ++a) {
            auto rhs_words = adem_expand(a, b);
            for (int i = 0; i < m.dim(); ++i) {
                auto lhs = tab.apply_word({a, b}, {i});
                std::vector<int> rhs;
                for (const auto& w : rhs_words)
                    rhs = sym_merge(rhs, tab.apply_word(w, {i}));
                if (lhs != rhs) {
                    ConsistencyViolation v;
                    v.kind = ConsistencyViolation::Kind::Adem;
                    v.gen = i;
                    v.a = a;
                    v.b = b;
                    v.detail = "Sq^a Sq^b differs from its Adem expansion";
                    rep.violations.push_back(std::move(v));
                }
            }
        }
    }
    return rep;
}

ModulePresentation dualize(const ModulePresentation& m, bool normalize)
{
    ActionTable tab = ActionTable::complete(m, CompletionMode::Generate);
    int span = m.span();
    ModulePresentation d;
    d.name = "D" + (m.name.empty() ? std::string("module") : m.name);
    for (int deg : m.degrees)
        d.degrees.push_back(-deg);
    for (int k = 1; k <= span; ++k) {
        /* matrix of chi(Sq^k) on m */
        auto chi = antipode_sq(k);
        std::vector<SqWord> words;
        {
            std::map<SqWord, int> acc;
            for (const auto& t : chi.terms)
                for (const auto& w : milnor_to_admissible(SteenrodElt{{t}}))
                    acc[w] ^= 1;
            for (auto& [w, c] : acc)
                if (c)
                    words.push_back(w);
        }
        std::vector<std::vector<int>> rows(size_t(m.dim()));
        for (int i = 0; i < m.dim(); ++i)
            for (const auto& w : words)
                rows[size_t(i)] = sym_merge(rows[size_t(i)], tab.apply_word(w, {i}));
        /* dual action = transpose */
        for (int i = 0; i < m.dim(); ++i) {
            std::vector<int> targets;
            for (int j = 0; j < m.dim(); ++j)
                if (std::binary_search(rows[size_t(j)].begin(), rows[size_t(j)].end(), i))
                    targets.push_back(j);
            if (!targets.empty())
                d.actions.push_back(ActionRecord{i, k, std::move(targets)});
        }
    }
    if (normalize)
        return suspend(d, -d.min_degree());
    return d;
}

ModulePresentation tensor(const ModulePresentation& a, const ModulePresentation& b, int max_k)
{
    ActionTable ta = ActionTable::complete(a, CompletionMode::Generate);
    ActionTable tb = ActionTable::complete(b, CompletionMode::Generate);
    ModulePresentation r;
    r.name = (a.name.empty() ? "M" : a.name) + "x" + (b.name.empty() ? "N" : b.name);
    int nb = b.dim();
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < nb; ++j)
            r.degrees.push_back(a.degrees[size_t(i)] + b.degrees[size_t(j)]);
    int span = a.span() + b.span();
    if (max_k < 0 || max_k > span)
        max_k = span;
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < nb; ++j) {
            for (int k = 1; k <= max_k; ++k) {
                /* Cartan: Sq^k(u@v) = sum_{p+q=k} Sq^p u @ Sq^q v */
                std::vector<int> targets;
                for (int p = 0; p <= k; ++p) {
                    int q = k - p;
                    if (p == 0) {
                        for (int v : tb.sq(q, j))
                            targets.push_back(i * nb + v);
                    }
                    else if (q == 0) {
                        for (int u : ta.sq(p, i))
                            targets.push_back(u * nb + j);
                    }
                    else {
                        for (int u : ta.sq(p, i))
                            for (int v : tb.sq(q, j))
                                targets.push_back(u * nb + v);
                    }
                }
                std::sort(targets.begin(), targets.end());
                /* cancel duplicate pairs mod 2 */
                std::vector<int> reduced;
                for (size_t s = 0; s < targets.size();) {
                    size_t e = s;
                    while (e < targets.size() && targets[e] == targets[s])
                        ++e;
                    if ((e - s) & 1)
                        reduced.push_back(targets[s]);
                    s = e;
                }
                if (!reduced.empty())
                    r.actions.push_back(ActionRecord{i * nb + j, k, std::move(reduced)});
            }
        }
    }
    return r;
}

ModulePresentation suspend(const ModulePresentation& m, int k)
{
    ModulePresentation r = m;
    if (k != 0)
        r.name = "S" + std::to_string(k) + (m.name.empty() ? "module" : m.name);
    for (auto& d : r.degrees)
        d += k;
    return r;
}

namespace {

struct IsoSearch {
    const ModulePresentation *m, *n;
    ActionTable tm, tn;
    std::vector<int> order;                    /* m-generators by ascending degree */
    std::vector<std::vector<int>> image;       /* current assignment */
    std::vector<char> assigned;
    std::map<int, std::vector<int>> n_by_deg;
    long budget;

    /* checks every 2-power action whose source and targets are fully assigned */
    bool consistent_upto(size_t next) const
    {
        /* degree of all assigned gens is <= degree of order[next-1] */
        int dmax = next == 0 ? INT_MIN : m->degrees[size_t(order[next - 1])];
        for (int k = 1; k <= m->span(); k *= 2) {
            for (int i = 0; i < m->dim(); ++i) {
                if (!assigned[size_t(i)])
                    continue;
                if (m->degrees[size_t(i)] + k > dmax)
                    continue;
                /* phi(Sq^k g_i) vs Sq^k phi(g_i) */
                std::vector<int> lhs;
                for (int t : tm.sq(k, i)) {
                    if (!assigned[size_t(t)])
                        goto next_gen;
                    lhs = sym_merge(lhs, image[size_t(t)]);
                }
                {
                    auto rhs = tn.apply_sq(k, image[size_t(i)]);
                    if (lhs != rhs)
                        return false;
                }
            next_gen:;
            }
        }
        return true;
    }

    bool search(size_t next)
    {
        if (--budget < 0)
            throw InputError("iso_check: node budget exceeded");
        if (next == order.size())
            return consistent_upto(next);
        int gi = order[size_t(next)];
        int deg = m->degrees[size_t(gi)];
        auto it = n_by_deg.find(deg);
        if (it == n_by_deg.end())
            return false;
        const auto& cands = it->second;
        size_t dim = cands.size();
        /* try all nonzero vectors in the target degree space */
        for (uint64_t mask = 1; mask < (uint64_t(1) << dim); ++mask) {
            std::vector<int> img;
            for (size_t b = 0; b < dim; ++b)
                if ((mask >> b) & 1)
                    img.push_back(cands[b]);
            /* degreewise independence from previously assigned images in this degree */
            {
                std::vector<std::vector<int>> space;
                bool indep = true;
                for (size_t p = 0; p < next; ++p)
                    if (m->degrees[size_t(order[p])] == deg)
                        space.push_back(image[size_t(order[p])]);
                space.push_back(img);
                /* gaussian elimination on index vectors */
                std::vector<std::vector<int>> ech;
                for (auto v : space) {
                    for (const auto& e : ech)
                        if (!v.empty() && !e.empty() && v.front() == e.front())
                            v = sym_merge(v, e);
                    /* reduce fully */
                    bool changed = true;
                    while (changed && !v.empty()) {
                        changed = false;
                        for (const auto& e : ech)
                            if (!e.empty() && !v.empty() && e.front() == v.front()) {
                                v = sym_merge(v, e);
                                changed = true;
                            }
                    }
                    if (v.empty()) {
                        indep = false;
                        break;
                    }
                    ech.push_back(v);
                    std::sort(ech.begin(), ech.end());
                }
                if (!indep)
                    continue;
            }
            image[size_t(gi)] = img;
            assigned[size_t(gi)] = 1;
            bool done_degree = next + 1 == order.size() || m->degrees[size_t(order[next + 1])] != deg;
            if (!done_degree || consistent_upto(next + 1)) {
                if (search(next + 1))
                    return true;
            }
            assigned[size_t(gi)] = 0;
        }
        image[size_t(gi)].clear();
        return false;
    }
};

}  // namespace

std::optional<GradedIso> iso_check(const ModulePresentation& m, const ModulePresentation& n, long node_budget)
{
    if (m.dim() != n.dim())
        return std::nullopt;
    std::map<int, int> dm, dn;
    for (int d : m.degrees)
        dm[d]++;
    for (int d : n.degrees)
        dn[d]++;
    if (dm != dn)
        return std::nullopt;

    IsoSearch s;
    s.m = &m;
    s.n = &n;
    s.tm = ActionTable::complete(m, CompletionMode::Generate);
    s.tn = ActionTable::complete(n, CompletionMode::Generate);
    for (int i = 0; i < m.dim(); ++i)
        s.order.push_back(i);
    std::stable_sort(s.order.begin(), s.order.end(), [&](int a, int b) { return m.degrees[size_t(a)] < m.degrees[size_t(b)]; });
    for (int j = 0; j < n.dim(); ++j)
        s.n_by_deg[n.degrees[size_t(j)]].push_back(j);
    s.image.assign(size_t(m.dim()), {});
    s.assigned.assign(size_t(m.dim()), 0);
    s.budget = node_budget;
    if (!s.search(0))
        return std::nullopt;
    GradedIso iso;
    iso.image = s.image;
    return iso;
}

namespace {

const std::map<std::string, std::string>& builtin_texts()
{
    static const std::map<std::string, std::string> defs = {
        {"S0", "1\n\n0\n"},
        {"Ceta", "2\n\n0 2\n\n0 2 1 1\n"},
        {"Y",
         "4\n"
         "\n"
         "0 1 2 3\n"
         "\n"
         "0 1 1 1\n"
         "0 2 1 2\n"
         "1 2 1 3\n"
         "2 1 1 3\n"},
        {"A1-00",
         "8\n"
         "\n"
         "0 1 2 3 3 4 5 6\n"
         "\n"
         "0 1 1 1\n"
         "0 2 1 2\n"
         "1 2 1 4\n"
         "1 4 1 6\n"
         "2 1 1 3\n"
         "2 2 1 5\n"
         "3 2 1 6\n"
         "4 1 1 5\n"
         "5 2 1 7\n"
         "6 1 1 7\n"},
        {"A1-10",
         "8\n"
         "\n"
         "0 1 2 3 3 4 5 6\n"
         "\n"
         "0 1 1 1\n"
         "0 2 1 2\n"
         "0 4 1 5\n"
         "1 2 1 4\n"
         "1 4 1 6\n"
         "2 1 1 3\n"
         "2 2 1 5\n"
         "3 2 1 6\n"
         "4 1 1 5\n"
         "5 2 1 7\n"
         "6 1 1 7\n"},
        {"A1-01",
         "8\n"
         "\n"
         "0 1 2 3 3 4 5 6\n"
         "\n"
         "0 1 1 1\n"
         "0 2 1 2\n"
         "1 2 1 4\n"
         "1 4 1 6\n"
         "2 1 1 3\n"
         "2 2 1 5\n"
         "2 4 1 7\n"
         "3 2 1 6\n"
         "4 1 1 5\n"
         "5 2 1 7\n"
         "6 1 1 7\n"},
        {"A1-11",
         "8\n"
         "\n"
         "0 1 2 3 3 4 5 6\n"
         "\n"
         "0 1 1 1\n"
         "0 2 1 2\n"
         "0 4 1 5\n"
         "1 2 1 4\n"
         "1 4 1 6\n"
         "2 1 1 3\n"
         "2 2 1 5\n"
         "2 4 1 7\n"
         "3 2 1 6\n"
         "4 1 1 5\n"
         "5 2 1 7\n"
         "6 1 1 7\n"},
        {"bo1",
         "4\n"
         "\n"
         "0 4 6 7\n"
         "\n"
         "0 4 1 1\n"
         "0 6 1 2\n"
         "0 7 1 3\n"
         "1 2 1 2\n"
         "1 3 1 3\n"
         "2 1 1 3\n"},
        {"bo2",
         "11\n"
         "\n"
         "0 4 6 7 8 10 11 12 13 14 15\n"
         "\n"
         "0 4 1 1\n"
         "0 6 1 2\n"
         "0 7 1 3\n"
         "1 2 1 2\n"
         "1 3 1 3\n"
         "2 1 1 3\n"
         "2 4 1 5\n"
         "2 5 1 6\n"
         "3 4 1 6\n"
         "3 6 1 8\n"
         "4 2 1 5\n"
         "4 3 1 6\n"
         "4 4 1 7\n"
         "4 5 1 8\n"
         "4 6 1 9\n"
         "4 7 1 10\n"
         "5 1 1 6\n"
         "6 2 1 8\n"
         "7 1 1 8\n"
         "7 2 1 9\n"
         "7 3 1 10\n"
         "9 1 1 10\n"},
    };
    return defs;
}

}  // namespace

const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names = {"S0", "Ceta", "Y", "A1-00", "A1-01", "A1-10", "A1-11", "bo1", "bo2"};
    return names;
}

const std::string& builtin_def_text(const std::string& name)
{
    const auto& defs = builtin_texts();
    auto it = defs.find(name);
    if (it == defs.end())
        throw InputError("unknown builtin module '" + name + "'");
    return it->second;
}

ModulePresentation builtin(const std::string& name)
{
    ModulePresentation m = parse_def(builtin_def_text(name));
    m.name = name;
    return m;
}

}  // namespace sqext
