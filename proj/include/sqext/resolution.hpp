#pragma once

#include "sqext/bitmat.hpp"
#include "sqext/milnor.hpp"
#include "sqext/module.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sqext {

/* One Milnor-basis term theta * g of a free module element; the generator
** ordinal refers to the previous filtration. */
struct FreeTerm {
    int op_deg;
    int op_idx;
    int gen;
    bool operator==(const FreeTerm& o) const = default;
};

struct ResGenerator {
    int t;
    std::vector<FreeTerm> d; /* differential image, filtrations >= 1 */
    std::vector<int> d0;     /* augmentation image in module basis, filtration 0 */
};

struct ResolveOptions {
    long max_cell_rows = 2000000;  /* abort threshold for one (s,t) cell */
    bool log_progress = false;
    std::function<void(int s, int t, int new_gens)> progress;
};

struct HopfEdge {
    int i;       /* h_i */
    int s, g;    /* source generator */
    int g2;      /* target generator at filtration s+1 */
};

/* Bigraded chart of a computed resolution: dims and generator labels s_g. */
struct ExtChart {
    std::string module_name;
    std::string profile_name;
    int smax = -1, tmax = 0;
    /* per filtration: internal degree of generator g (creation order = t order) */
    std::vector<std::vector<int>> gen_degrees;
    std::vector<HopfEdge> hopf;

    int dim(int s, int t) const
    {
        if (s < 0 || s >= int(gen_degrees.size()))
            return 0;
        int n = 0;
        for (int d : gen_degrees[size_t(s)])
            if (d == t)
                ++n;
        return n;
    }
    std::map<std::pair<int, int>, int> dims() const;
};

class Resolution {
public:
    Resolution(ActionTable module, Profile profile) : mod_(std::move(module)), prof_(profile), alg_(prof_) {}

    const ActionTable& module() const { return mod_; }
    const Profile& profile() const { return prof_; }
    const AlgebraBasis& algebra() const { return alg_; }
    int smax() const { return smax_; }
    int tmax() const { return tmax_; }
    const std::vector<std::vector<ResGenerator>>& gens() const { return gens_; }
    const ResGenerator& gen(int s, int g) const { return gens_[size_t(s)][size_t(g)]; }

    /* Extends the computed region to s <= smax, t <= tmax. */
    void extend(int smax, int tmax, const ResolveOptions& opt = {});

    ExtChart chart() const;

    /* basis of (F_s)_t: pairs (op in alg.basis(t - t_gen), gen); ordered by
    ** generator then the basis order of the operation */
    struct CellBasis {
        std::vector<std::pair<int, int>> items; /* (gen, op_idx); op degree = t - t_gen */
        std::map<std::pair<int, int>, int> index;
        int dim() const { return int(items.size()); }
    };
    CellBasis cell_basis(int s, int t) const;

    /* matrix of d_s at internal degree t (rows = cell_basis(s,t), cols =
    ** cell_basis(s-1,t), or module basis in degree t when s = 0) */
    BitMatrix differential_matrix(int s, int t) const;

    void save(const std::string& path) const;
    static Resolution load(const std::string& path, ActionTable module, Profile profile);

    /* exact structural checks, used by tests */
    bool check_dd_zero() const;
    bool check_minimality() const;

private:
    ActionTable mod_;
    Profile prof_;
    AlgebraBasis alg_;
    int smax_ = -1;
    int tmax_ = -1;
    bool fresh_ = true;
    std::vector<std::vector<ResGenerator>> gens_;

    BitVec image_of(int s, int t, int op_deg, int op_idx, int gen, const CellBasis& target) const;
    friend class ChainLift;
};

Resolution resolve(const ActionTable& module, const Profile& profile, int smax, int tmax, const ResolveOptions& opt = {});

std::vector<HopfEdge> hopf_actions(const Resolution& res);

/* Chain-map lift of the Ext class dual to generator (s0, g0): per level k,
** images of the F_{s0+k} generators in (F^{S0}_k) coordinates. */
class ChainLift {
public:
    int s0, g0, t0, depth;
    /* level k -> per generator of F^M_{s0+k}: terms over gens of F^{S0}_k */
    std::vector<std::vector<std::vector<FreeTerm>>> maps;

    static ChainLift lift_cocycle(const Resolution& res_m, int s0, int g0, const Resolution& res_s0, int depth,
                                  bool reverse_pivots = false);
};

struct ProductRecord {
    int s, g;                 /* acting sphere class s_g */
    int t;                    /* its internal degree */
    std::vector<int> result;  /* generator ordinals at filtration s0 + s of the module resolution */
};

std::vector<ProductRecord> product_table(const ChainLift& lift, const Resolution& res_m, const Resolution& res_s0);

/* Map.aug-format lines "s g1 g" for a product table. */
std::string map_aug_text(const std::vector<ProductRecord>& records);

}  // namespace sqext
