#include "sqext/resolution.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace sqext {

std::map<std::pair<int, int>, int> ExtChart::dims() const
{
    std::map<std::pair<int, int>, int> d;
    for (size_t s = 0; s < gen_degrees.size(); ++s)
        for (int t : gen_degrees[s])
            d[{int(s), t}]++;
    return d;
}

Resolution::CellBasis Resolution::cell_basis(int s, int t) const
{
    CellBasis cb;
    if (s < 0 || s >= int(gens_.size()))
        return cb;
    const auto& gs = gens_[size_t(s)];
    for (int g = 0; g < int(gs.size()); ++g) {
        int od = t - gs[size_t(g)].t;
        if (od < 0)
            continue;
        int nd = alg_.dim(od);
        for (int i = 0; i < nd; ++i) {
            cb.index[{g, i}] = int(cb.items.size());
            cb.items.push_back({g, i});
        }
    }
    return cb;
}

BitVec Resolution::image_of(int s, int t, int op_deg, int op_idx, int gen, const CellBasis& target) const
{
    BitVec v(bv_words(size_t(std::max(1, target.dim()))), 0);
    if (s == 0) {
        /* theta . d0(gen), in module coordinates handled by the caller */
        throw InputError("image_of: s = 0 handled separately");
    }
    const auto& terms = gens_[size_t(s)][size_t(gen)].d;
    (void)t;
    for (const auto& tm : terms) {
        for (int idx : alg_.product(op_deg, op_idx, tm.op_deg, tm.op_idx)) {
            auto it = target.index.find({tm.gen, idx});
            if (it == target.index.end())
                throw InputError("image_of: missing target basis element (internal)");
            bv_flip(v, size_t(it->second));
        }
    }
    return v;
}

BitMatrix Resolution::differential_matrix(int s, int t) const
{
    CellBasis src = cell_basis(s, t);
    if (s == 0) {
        const auto& mg = mod_.gens_in_degree(t);
        std::map<int, int> midx;
        for (size_t i = 0; i < mg.size(); ++i)
            midx[mg[i]] = int(i);
        BitMatrix d(size_t(src.dim()), size_t(std::max<size_t>(1, mg.size())));
        for (int r = 0; r < src.dim(); ++r) {
            auto [g, oi] = src.items[size_t(r)];
            int od = t - gens_[0][size_t(g)].t;
            const auto& rows = mod_.milnor_rows(alg_.basis(od)[size_t(oi)]);
            for (int m0 : gens_[0][size_t(g)].d0)
                for (int m1 : rows[size_t(m0)])
                    d.flip(size_t(r), size_t(midx.at(m1)));
        }
        return d;
    }
    CellBasis dst = cell_basis(s - 1, t);
    BitMatrix d(size_t(src.dim()), size_t(std::max(1, dst.dim())));
    for (int r = 0; r < src.dim(); ++r) {
        auto [g, oi] = src.items[size_t(r)];
        int od = t - gens_[size_t(s)][size_t(g)].t;
        BitVec v = image_of(s, t, od, oi, g, dst);
        d.set_row(size_t(r), v);
    }
    return d;
}

void Resolution::extend(int smax, int tmax, const ResolveOptions& opt)
{
    int new_smax = std::max(smax_, smax);
    int new_tmax = fresh_ ? tmax : std::max(tmax_, tmax);
    int old_smax = smax_;
    int old_tmax = fresh_ ? mod_.min_degree() - 1 : tmax_;
    if (new_smax >= int(gens_.size()))
        gens_.resize(size_t(new_smax) + 1);
    auto snapshot_sizes = [&]() {
        std::vector<size_t> ns;
        for (auto& g : gens_)
            ns.push_back(g.size());
        return ns;
    };
    auto sizes0 = snapshot_sizes();

    try {
        for (int t = mod_.min_degree(); t <= new_tmax; ++t) {
            if (t <= old_tmax && new_smax <= old_smax)
                continue;
            BitMatrix prev_d; /* matrix of d_{s-1} at degree t, rows already include unit rows */
            int module_dim_t = int(mod_.gens_in_degree(t).size());
            for (int s = 0; s <= new_smax; ++s) {
                bool done = (s <= old_smax && t <= old_tmax);
                bool next_done = (s + 1 <= old_smax && t <= old_tmax);
                if (done && next_done)
                    continue; /* matrix not needed before the first fresh cell */
                CellBasis target = s == 0 ? CellBasis{} : cell_basis(s - 1, t);
                int target_dim = s == 0 ? module_dim_t : target.dim();
                CellBasis src = cell_basis(s, t);
                if (long(src.dim()) > opt.max_cell_rows)
                    throw BudgetError("cell (" + std::to_string(s) + "," + std::to_string(t) + ") exceeds row budget");

                BitMatrix d(0, size_t(std::max(1, target_dim)));
                if (s == 0) {
                    const auto& mg = mod_.gens_in_degree(t);
                    std::map<int, int> midx;
                    for (size_t i = 0; i < mg.size(); ++i)
                        midx[mg[i]] = int(i);
                    for (int r = 0; r < src.dim(); ++r) {
                        auto [g, oi] = src.items[size_t(r)];
                        int od = t - gens_[0][size_t(g)].t;
                        BitVec v(bv_words(size_t(std::max(1, target_dim))), 0);
                        const auto& rows = mod_.milnor_rows(alg_.basis(od)[size_t(oi)]);
                        for (int m0 : gens_[0][size_t(g)].d0)
                            for (int m1 : rows[size_t(m0)])
                                bv_flip(v, size_t(midx.at(m1)));
                        d.append_row(v);
                    }
                }
                else {
                    for (int r = 0; r < src.dim(); ++r) {
                        auto [g, oi] = src.items[size_t(r)];
                        int od = t - gens_[size_t(s)][size_t(g)].t;
                        d.append_row(image_of(s, t, od, oi, g, target));
                    }
                }

                if (!done) {
                    /* kernel of the previous differential = what must be hit */
                    BitMatrix ker;
                    if (s == 0) {
                        ker = BitMatrix(size_t(module_dim_t), size_t(std::max(1, module_dim_t)));
                        for (int i = 0; i < module_dim_t; ++i)
                            ker.set(size_t(i), size_t(i));
                    }
                    else {
                        ker = left_kernel(prev_d);
                    }
                    EchelonBasis img(size_t(std::max(1, target_dim)));
                    for (size_t r = 0; r < d.rows(); ++r)
                        img.insert(d.row_vec(r));
                    int added = 0;
                    for (size_t r = 0; r < ker.rows(); ++r) {
                        BitVec kv = ker.row_vec(r);
                        img.reduce(kv);
                        if (bv_is_zero(kv))
                            continue;
                        ResGenerator ng;
                        ng.t = t;
                        if (s == 0) {
                            const auto& mg = mod_.gens_in_degree(t);
                            for (int j : bv_support(kv))
                                ng.d0.push_back(mg[size_t(j)]);
                        }
                        else {
                            for (int j : bv_support(kv)) {
                                auto [g2, oi2] = target.items[size_t(j)];
                                int od2 = t - gens_[size_t(s) - 1][size_t(g2)].t;
                                ng.d.push_back(FreeTerm{od2, oi2, g2});
                            }
                        }
                        gens_[size_t(s)].push_back(std::move(ng));
                        d.append_row(kv);
                        img.insert(kv);
                        ++added;
                    }
                    if (opt.progress)
                        opt.progress(s, t, added);
                    else if (opt.log_progress && added)
                        std::cerr << "  (" << s << "," << t << "): +" << added << " generators\n";
                }
                prev_d = std::move(d);
            }
        }
    }
    catch (...) {
        auto sizes = snapshot_sizes();
        for (size_t s = 0; s < gens_.size(); ++s)
            if (sizes[s] > sizes0[s])
                gens_[s].resize(sizes0[s]);
        throw;
    }
    smax_ = new_smax;
    tmax_ = new_tmax;
    fresh_ = false;
}

ExtChart Resolution::chart() const
{
    ExtChart c;
    c.module_name = mod_.name;
    c.profile_name = prof_.name();
    c.smax = smax_;
    c.tmax = tmax_;
    for (const auto& gs : gens_) {
        c.gen_degrees.emplace_back();
        for (const auto& g : gs)
            c.gen_degrees.back().push_back(g.t);
    }
    c.hopf = hopf_actions(*this);
    return c;
}

bool Resolution::check_dd_zero() const
{
    for (int s = 1; s < int(gens_.size()); ++s) {
        for (const auto& y : gens_[size_t(s)]) {
            if (s == 1) {
                std::vector<int> acc;
                for (const auto& tm : y.d) {
                    const auto& rows = mod_.milnor_rows(alg_.basis(tm.op_deg)[size_t(tm.op_idx)]);
                    for (int m0 : gens_[0][size_t(tm.gen)].d0)
                        acc = sym_merge(acc, rows[size_t(m0)]);
                }
                if (!acc.empty())
                    return false;
            }
            else {
                std::map<std::tuple<int, int, int>, int> acc;
                for (const auto& tm : y.d)
                    for (const auto& um : gens_[size_t(s) - 1][size_t(tm.gen)].d)
                        for (int idx : alg_.product(tm.op_deg, tm.op_idx, um.op_deg, um.op_idx))
                            acc[{tm.op_deg + um.op_deg, idx, um.gen}] ^= 1;
                for (auto& [k, v] : acc)
                    if (v)
                        return false;
            }
        }
    }
    return true;
}

bool Resolution::check_minimality() const
{
    for (size_t s = 1; s < gens_.size(); ++s)
        for (const auto& y : gens_[s])
            for (const auto& tm : y.d)
                if (tm.op_deg == 0)
                    return false;
    return true;
}

Resolution resolve(const ActionTable& module, const Profile& profile, int smax, int tmax, const ResolveOptions& opt)
{
    Resolution r(module, profile);
    r.extend(smax, tmax, opt);
    return r;
}

std::vector<HopfEdge> hopf_actions(const Resolution& res)
{
    std::vector<HopfEdge> out;
    const auto& alg = res.algebra();
    for (int s = 1; s <= res.smax(); ++s) {
        const auto& gs = res.gens()[size_t(s)];
        for (int gy = 0; gy < int(gs.size()); ++gy) {
            for (const auto& tm : gs[size_t(gy)].d) {
                int k = tm.op_deg;
                if (k != 1 && k != 2 && k != 4 && k != 8)
                    continue;
                const auto& op = alg.basis(k)[size_t(tm.op_idx)];
                if (op.r.size() != 1 || op.r[0] != uint32_t(k))
                    continue;
                int i = k == 1 ? 0 : k == 2 ? 1 : k == 4 ? 2 : 3;
                out.push_back(HopfEdge{i, s - 1, tm.gen, gy});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const HopfEdge& a, const HopfEdge& b) {
        return std::tie(a.s, a.g, a.i, a.g2) < std::tie(b.s, b.g, b.i, b.g2);
    });
    return out;
}

ChainLift ChainLift::lift_cocycle(const Resolution& res_m, int s0, int g0, const Resolution& res_s0, int depth,
                                  bool reverse_pivots)
{
    if (s0 < 0 || s0 > res_m.smax() || g0 < 0 || g0 >= int(res_m.gens()[size_t(s0)].size()))
        throw InputError("lift_cocycle: no generator (" + std::to_string(s0) + "," + std::to_string(g0) + ")");
    if (res_s0.gens().empty() || res_s0.gens()[0].size() != 1 || res_s0.gens()[0][0].t != 0)
        throw InputError("lift_cocycle: sphere resolution must have a single generator at (0,0)");
    if (!(res_m.profile() == res_s0.profile()))
        throw InputError("lift_cocycle: resolutions are over different profiles");
    if (s0 + depth > res_m.smax())
        throw BudgetError("lift_cocycle: module resolution computed to s <= " + std::to_string(res_m.smax()) +
                          ", need " + std::to_string(s0 + depth));
    ChainLift lift;
    lift.s0 = s0;
    lift.g0 = g0;
    lift.t0 = res_m.gen(s0, g0).t;
    lift.depth = depth;
    lift.maps.resize(size_t(depth) + 1);

    const auto& alg = res_m.algebra();

    /* level 0: dual-basis map */
    {
        auto& f0 = lift.maps[0];
        f0.resize(res_m.gens()[size_t(s0)].size());
        f0[size_t(g0)].push_back(FreeTerm{0, 0, 0});
    }

    for (int k = 1; k <= depth; ++k) {
        if (k > res_s0.smax())
            throw BudgetError("lift_cocycle: sphere resolution computed to s <= " + std::to_string(res_s0.smax()) +
                              ", need " + std::to_string(k));
        auto& fk = lift.maps[size_t(k)];
        const auto& prev = lift.maps[size_t(k) - 1];
        const auto& gs = res_m.gens()[size_t(s0 + k)];
        fk.resize(gs.size());
        struct CellSolve {
            Resolution::CellBasis src, dst;
            std::vector<int> rowmap; /* solver row -> src item */
            RowSolver solver;
        };
        std::map<int, std::unique_ptr<CellSolve>> solvers;
        for (int gy = 0; gy < int(gs.size()); ++gy) {
            int tau = gs[size_t(gy)].t - lift.t0;
            if (tau < 0)
                continue;
            if (tau > res_s0.tmax())
                throw BudgetError("lift_cocycle: sphere resolution computed to t <= " + std::to_string(res_s0.tmax()) +
                                  ", need " + std::to_string(tau));
            auto it = solvers.find(tau);
            if (it == solvers.end()) {
                auto cs = std::make_unique<CellSolve>(CellSolve{res_s0.cell_basis(k, tau), res_s0.cell_basis(k - 1, tau),
                                                                {}, RowSolver(BitMatrix(0, 1))});
                BitMatrix d(0, size_t(std::max(1, cs->dst.dim())));
                std::vector<int> order(size_t(cs->src.dim()));
                for (size_t i = 0; i < order.size(); ++i)
                    order[i] = int(i);
                if (reverse_pivots)
                    std::reverse(order.begin(), order.end());
                for (int r : order) {
                    auto [g2, oi2] = cs->src.items[size_t(r)];
                    int od2 = tau - res_s0.gens()[size_t(k)][size_t(g2)].t;
                    d.append_row(res_s0.image_of(k, tau, od2, oi2, g2, cs->dst));
                    cs->rowmap.push_back(r);
                }
                cs->solver = RowSolver(d);
                it = solvers.emplace(tau, std::move(cs)).first;
            }
            CellSolve& cs = *it->second;
            /* rhs = f_{k-1}(d y) in cell_basis(k-1, tau) coordinates */
            BitVec rhs(bv_words(size_t(std::max(1, cs.dst.dim()))), 0);
            for (const auto& tm : gs[size_t(gy)].d) {
                for (const auto& ft : prev[size_t(tm.gen)]) {
                    for (int idx : alg.product(tm.op_deg, tm.op_idx, ft.op_deg, ft.op_idx)) {
                        auto jt = cs.dst.index.find({ft.gen, idx});
                        if (jt == cs.dst.index.end())
                            throw InputError("lift_cocycle: missing sphere basis element (internal)");
                        bv_flip(rhs, size_t(jt->second));
                    }
                }
            }
            auto sol = cs.solver.solve(std::move(rhs));
            if (!sol)
                throw InputError("lift_cocycle: chain equation unsolvable (internal)");
            for (int j : bv_support(*sol)) {
                int item = cs.rowmap[size_t(j)];
                auto [g2, oi2] = cs.src.items[size_t(item)];
                int od2 = tau - res_s0.gens()[size_t(k)][size_t(g2)].t;
                fk[size_t(gy)].push_back(FreeTerm{od2, oi2, g2});
            }
            std::sort(fk[size_t(gy)].begin(), fk[size_t(gy)].end(), [](const FreeTerm& a, const FreeTerm& b) {
                return std::tie(a.gen, a.op_deg, a.op_idx) < std::tie(b.gen, b.op_deg, b.op_idx);
            });
        }
    }
    return lift;
}

std::vector<ProductRecord> product_table(const ChainLift& lift, const Resolution& res_m, const Resolution& res_s0)
{
    std::vector<ProductRecord> out;
    for (int s = 0; s <= lift.depth; ++s) {
        const auto& sgens = res_s0.gens()[size_t(s)];
        for (int gy = 0; gy < int(sgens.size()); ++gy) {
            ProductRecord rec;
            rec.s = s;
            rec.g = gy;
            rec.t = sgens[size_t(gy)].t;
            const auto& fs = lift.maps[size_t(s)];
            for (int w = 0; w < int(fs.size()); ++w) {
                if (res_m.gen(lift.s0 + s, w).t != lift.t0 + rec.t)
                    continue;
                for (const auto& ft : fs[size_t(w)])
                    if (ft.op_deg == 0 && ft.gen == gy) {
                        rec.result.push_back(w);
                        break;
                    }
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

std::string map_aug_text(const std::vector<ProductRecord>& records)
{
    std::ostringstream os;
    for (const auto& r : records)
        for (int g1 : r.result)
            os << r.s << " " << g1 << " " << r.g << "\n";
    return os.str();
}

void Resolution::save(const std::string& path) const
{
    std::ofstream os(path);
    if (!os)
        throw CacheError("cannot open '" + path + "' for writing");
    os << "sqext-resolution 1\n";
    os << "profile " << prof_.name() << "\n";
    os << "module " << (mod_.name.empty() ? "-" : mod_.name) << "\n";
    os << "module-hash " << std::hex << mod_.content_hash() << std::dec << "\n";
    os << "smax " << smax_ << "\n";
    os << "tmax " << tmax_ << "\n";
    for (size_t s = 0; s < gens_.size(); ++s) {
        os << "filt " << s << " " << gens_[s].size() << "\n";
        for (const auto& g : gens_[s]) {
            if (s == 0) {
                os << "g " << g.t << " d0 " << g.d0.size();
                for (int i : g.d0)
                    os << " " << i;
                os << "\n";
            }
            else {
                os << "g " << g.t << " d " << g.d.size();
                for (const auto& tm : g.d) {
                    const auto& op = alg_.basis(tm.op_deg)[size_t(tm.op_idx)];
                    os << "  " << tm.gen << " " << op.r.size();
                    for (uint32_t r : op.r)
                        os << " " << r;
                }
                os << "\n";
            }
        }
    }
}

Resolution Resolution::load(const std::string& path, ActionTable module, Profile profile)
{
    std::ifstream is(path);
    if (!is)
        throw CacheError("cannot open '" + path + "'");
    std::string word;
    int version = 0;
    is >> word >> version;
    if (word != "sqext-resolution" || version != 1)
        throw CacheError("unrecognized cache header in '" + path + "' (version mismatch or foreign file)");
    Resolution res(std::move(module), profile);
    std::string pname;
    is >> word >> pname;
    if (word != "profile" || pname != profile.name())
        throw CacheError("cache profile '" + pname + "' does not match requested " + profile.name());
    std::string mname;
    is >> word >> mname;
    if (word != "module")
        throw CacheError("malformed cache");
    uint64_t hash = 0;
    is >> word >> std::hex >> hash >> std::dec;
    if (word != "module-hash" || hash != res.mod_.content_hash())
        throw CacheError("cache module hash does not match the supplied module");
    int smax = 0, tmax = 0;
    is >> word >> smax;
    if (word != "smax")
        throw CacheError("malformed cache");
    is >> word >> tmax;
    if (word != "tmax")
        throw CacheError("malformed cache");
    while (is >> word) {
        if (word != "filt")
            throw CacheError("malformed cache near '" + word + "'");
        size_t s = 0, n = 0;
        is >> s >> n;
        if (res.gens_.size() <= s)
            res.gens_.resize(s + 1);
        for (size_t i = 0; i < n; ++i) {
            ResGenerator g;
            std::string kind;
            size_t cnt = 0;
            is >> word >> g.t >> kind >> cnt;
            if (word != "g" || (kind != "d0" && kind != "d"))
                throw CacheError("malformed cache generator record");
            if (kind == "d0") {
                for (size_t j = 0; j < cnt; ++j) {
                    int v;
                    is >> v;
                    g.d0.push_back(v);
                }
            }
            else {
                for (size_t j = 0; j < cnt; ++j) {
                    int gen, len;
                    is >> gen >> len;
                    MilnorElt m;
                    for (int r = 0; r < len; ++r) {
                        uint32_t e;
                        is >> e;
                        m.r.push_back(e);
                    }
                    m.trim();
                    int od = m.degree();
                    g.d.push_back(FreeTerm{od, res.alg_.index_of(m), gen});
                }
            }
            res.gens_[s].push_back(std::move(g));
        }
    }
    res.smax_ = smax;
    res.tmax_ = tmax;
    res.fresh_ = false;
    return res;
}

}  // namespace sqext
