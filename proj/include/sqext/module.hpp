#pragma once

#include "sqext/milnor.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sqext {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg) : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct CompletionError : std::runtime_error {
    int gen, k;
    CompletionError(int gen_, int k_, const std::string& msg)
        : std::runtime_error("action (" + std::to_string(gen_) + ", Sq^" + std::to_string(k_) + "): " + msg), gen(gen_), k(k_)
    {
    }
};

/* One line "i k l j1 ... jl" of a definition file. */
struct ActionRecord {
    int gen;
    int k;
    std::vector<int> targets; /* sorted ascending */
};

/* Finite graded F2-module presented by generator degrees and Sq^k action lines. */
struct ModulePresentation {
    std::string name;
    std::vector<int> degrees;
    std::vector<ActionRecord> actions;

    int dim() const { return int(degrees.size()); }
    int min_degree() const;
    int max_degree() const;
    int span() const { return degrees.empty() ? 0 : max_degree() - min_degree(); }

    /* order-insensitive record equality */
    bool equivalent(const ModulePresentation& o) const;
};

ModulePresentation parse_def(const std::string& text);
std::string serialize_def(const ModulePresentation& m);

enum class CompletionMode { Generate, Strict };

/* Completed Sq^k action matrices of a presentation, sparse by generator. */
class ActionTable {
public:
    std::string name;
    std::vector<int> degrees;

    static ActionTable complete(const ModulePresentation& m, CompletionMode mode, int max_k = -1);

    int dim() const { return int(degrees.size()); }
    int min_degree() const { return min_deg_; }
    int max_degree() const { return max_deg_; }
    int max_k() const { return int(sq_.size()) - 1; }

    /* targets of Sq^k on generator i (empty when zero or k > max_k) */
    const std::vector<int>& sq(int k, int gen) const;
    /* image of Sq^k on a sum of generators */
    std::vector<int> apply_sq(int k, const std::vector<int>& v) const;
    /* image of a word Sq^{k1}...Sq^{kl} (rightmost letter acts first) */
    std::vector<int> apply_word(const SqWord& w, const std::vector<int>& v) const;
    /* action of a Milnor basis element, rows cached per element */
    const std::vector<std::vector<int>>& milnor_rows(const MilnorElt& m) const;

    const std::vector<int>& gens_in_degree(int d) const;

    uint64_t content_hash() const;

private:
    int min_deg_ = 0, max_deg_ = 0;
    std::vector<std::vector<std::vector<int>>> sq_; /* sq_[k][gen] */
    std::map<int, std::vector<int>> by_degree_;
    mutable std::map<std::vector<uint32_t>, std::vector<std::vector<int>>> milnor_cache_;

    friend ActionTable;
};

struct ConsistencyViolation {
    enum class Kind { Degree, Adem, Completion } kind;
    int gen = -1; /* witness generator */
    int a = 0, b = 0;
    std::string detail;
    std::string str() const;
};

struct ConsistencyReport {
    std::vector<ConsistencyViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const;
};

ConsistencyReport check_consistency(const ModulePresentation& m, CompletionMode mode = CompletionMode::Generate);

/* Dual module: generators in degrees -d_i, Sq^k action transposed through chi.
** With normalize, the result is suspended so its bottom degree is 0. */
ModulePresentation dualize(const ModulePresentation& m, bool normalize = false);

ModulePresentation tensor(const ModulePresentation& a, const ModulePresentation& b, int max_k = -1);

ModulePresentation suspend(const ModulePresentation& m, int k);

/* Graded isomorphism commuting with all Sq^{2^i}, found by backtracking. */
struct GradedIso {
    /* image[i] = generator indices of N whose sum is the image of generator i of M */
    std::vector<std::vector<int>> image;
};
std::optional<GradedIso> iso_check(const ModulePresentation& m, const ModulePresentation& n, long node_budget = 20000000);

ModulePresentation builtin(const std::string& name);
const std::vector<std::string>& builtin_names();
/* verbatim definition-file text of a builtin */
const std::string& builtin_def_text(const std::string& name);

/* symmetric difference of sorted index vectors (F2 sum) */
std::vector<int> sym_merge(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace sqext
