#pragma once

#include "sqext/milnor.hpp"
#include "sqext/module.hpp"

#include <map>
#include <vector>

namespace sqext {

/* Monomial xi_1^{e1} ... xi_m^{em} in the dual of the profile algebra.
** Exponent vectors coincide with Milnor-basis exponent sequences under the
** duality pairing <Sq(r), xi^e> = delta_{r,e}. */
using DualMonomial = std::vector<uint32_t>;

/* Full coproduct of a dual basis monomial, as (left, right) exponent pairs,
** truncated by the profile. F2 multiset semantics (normalized, no duplicates). */
std::vector<std::pair<DualMonomial, DualMonomial>> coproduct(const DualMonomial& x, const Profile& profile);

struct CobarOptions {
    long max_words_per_cell = 5000000;
};

/* Homology dimensions of the reduced cobar complex of the profile dual with
** coefficients in the dual of the module: dims of Ext^{s,t}(M, F2) for
** s <= smax, t <= tmax. */
std::map<std::pair<int, int>, int> cobar_ext(const ActionTable& module, const Profile& profile, int smax, int tmax,
                                             const CobarOptions& opt = {});

}  // namespace sqext
