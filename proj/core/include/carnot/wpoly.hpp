#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carnot/linalg.hpp"
#include "carnot/weights.hpp"

namespace carnot {

// Polynomial with exact rational coefficients over variables carrying fixed
// nonnegative weights.  Weight 0 marks ungraded parameter variables; they do
// not count toward weighted degree, so truncation never drops them.
// Invariants: no zero coefficients are stored, keys are lex-ordered by
// std::map, and every stored term has weighted degree <= ntrunc.
struct WPoly {
    std::vector<int> w;
    int ntrunc = 0;
    std::map<MultiIndex, Rat> terms;

    int nvars() const { return (int)w.size(); }
    bool is_zero() const { return terms.empty(); }

    bool operator==(const WPoly&) const = default;
};

WPoly wp_zero(const std::vector<int>& w, int ntrunc);
WPoly wp_const(const std::vector<int>& w, int ntrunc, const Rat& c);
WPoly wp_var(const std::vector<int>& w, int ntrunc, int i);
WPoly wp_monomial(const std::vector<int>& w, int ntrunc, const MultiIndex& alpha, const Rat& c);

// Adds c * x^alpha, dropping the term if it exceeds ntrunc or cancels.
void wp_add_term(WPoly& p, const MultiIndex& alpha, const Rat& c);

WPoly wp_add(const WPoly& a, const WPoly& b);
WPoly wp_sub(const WPoly& a, const WPoly& b);
WPoly wp_neg(const WPoly& a);
WPoly wp_mul(const WPoly& a, const WPoly& b);
WPoly wp_scale(const Rat& c, const WPoly& a);
WPoly wp_derivative(const WPoly& a, int i);

Rat wp_eval(const WPoly& p, const PointQ& x);
double wp_eval_double(const WPoly& p, const PointD& x);

// Substitutes x_i := vals[i].  All vals must share one variable space and
// have zero constant term; the graded truncation of the result is sound
// because weighted degrees never decrease under such substitution.
WPoly wp_subst(const WPoly& p, const std::vector<WPoly>& vals);

// Substitutes x_i := x_i + a_i exactly.  The input must hold its full term
// list (a genuine polynomial, not a truncated jet) for the result to be
// meaningful.
WPoly wp_shift(const WPoly& p, const PointQ& a);

// Truncation marker for exact polynomials: effectively unbounded, so no
// operation ever drops a term.
inline constexpr int kExactTrunc = std::numeric_limits<int>::max() / 2;

// Changes the truncation order, dropping terms above the new one.  Raising
// the order of a truncated jet does not recover dropped terms; only exact
// polynomials may be promoted.
WPoly wp_retrunc(const WPoly& p, int ntrunc);

// Substitution that allows constant terms in vals.  Sound only in exact
// pipelines: vals must carry kExactTrunc so nothing is dropped.
WPoly wp_subst_exact(const WPoly& p, const std::vector<WPoly>& vals);

// Evaluates the variable block [start, start + len) at rational constants
// and removes those variables.  Exact on genuine polynomials; on truncated
// jets it is sound only at vals = 0.
WPoly wp_partial_eval(const WPoly& p, int start, int len, const PointQ& vals);

// Minimal weighted degree over stored terms; nullopt when zero.
std::optional<long long> wp_min_degree(const WPoly& p);
long long wp_max_total_degree(const WPoly& p);

// Keeps terms whose weighted degree equals d.
WPoly wp_graded_slice(const WPoly& p, long long d);

std::string wp_str(const WPoly& p, const std::string& var_prefix = "x");

// Polynomial map between weighted coordinate spaces.
struct WPolyMap {
    std::vector<int> src_w;
    std::vector<int> tgt_w;
    int ntrunc = 0;
    std::vector<WPoly> comp;

    int src_dim() const { return (int)src_w.size(); }
    int tgt_dim() const { return (int)tgt_w.size(); }

    bool operator==(const WPolyMap&) const = default;
};

WPolyMap wpmap_zero(const std::vector<int>& src_w, const std::vector<int>& tgt_w, int ntrunc);
WPolyMap wpmap_identity(const std::vector<int>& w, int ntrunc);
WPolyMap wpmap_linear(const QMat& a, const std::vector<int>& src_w,
                      const std::vector<int>& tgt_w, int ntrunc);

WPolyMap wpmap_add(const WPolyMap& a, const WPolyMap& b);
WPolyMap wpmap_sub(const WPolyMap& a, const WPolyMap& b);

PointQ wpmap_eval(const WPolyMap& f, const PointQ& x);
PointD wpmap_eval_double(const WPolyMap& f, const PointD& x);

// Pure linear coefficients as a matrix (tgt_dim x src_dim).
QMat linear_part(const WPolyMap& f);

// Jacobian entry (k, j) = d comp_k / d x_j.
std::vector<std::vector<WPoly>> jacobian(const WPolyMap& f);

// Homogeneous part of order ell: for component k keeps terms of weighted
// degree ell + tgt_w[k].  Requires ell >= -max(tgt_w).
WPolyMap hom_part(const WPolyMap& f, long long ell);

// Minimal over components k and terms alpha of <alpha> - tgt_w[k]; nullopt
// when the map is zero at this truncation (order above truncation).
std::optional<long long> weighted_order(const WPolyMap& f);

// outer after inner.  Components of inner must have zero constant term.
WPolyMap wpmap_compose(const WPolyMap& outer, const WPolyMap& inner);

// Composition for exact pipelines: inner may have constant terms but must
// carry kExactTrunc.
WPolyMap wpmap_compose_exact(const WPolyMap& outer, const WPolyMap& inner);

WPolyMap wpmap_retrunc(const WPolyMap& f, int ntrunc);

// Evaluates the source block [start, start + len) at rational constants.
WPolyMap wpmap_partial_eval(const WPolyMap& f, int start, int len, const PointQ& vals);

// Substitutes outer's variables by vals over a new source space.
WPolyMap wpmap_subst(const WPolyMap& outer, const std::vector<WPoly>& vals,
                     const std::vector<int>& new_src_w);

// Inverse jet of a map fixing 0.  The first `passive` source variables are
// carried as parameters: the map sends (u, v) to Phi_u(v) and the result
// sends (u, y) to the v with Phi_u(v) = y.  Requires components to vanish on
// v = 0 and the pure-v linear block to be invertible.
WPolyMap invert_map(const WPolyMap& f, int passive = 0);

// Polynomial vector field: coeff[l] multiplies d/dx_l.
struct WPolyVectorField {
    std::vector<int> w;
    int ntrunc = 0;
    std::vector<WPoly> coeff;

    int nvars() const { return (int)w.size(); }

    bool operator==(const WPolyVectorField&) const = default;
};

WPolyVectorField vf_zero(const std::vector<int>& w, int ntrunc);

// X(f) = sum_l coeff[l] * df/dx_l.
WPoly vf_apply(const WPolyVectorField& x, const WPoly& f);

WPolyVectorField vf_add(const WPolyVectorField& a, const WPolyVectorField& b);
WPolyVectorField vf_sub(const WPolyVectorField& a, const WPolyVectorField& b);
WPolyVectorField vf_scale(const Rat& c, const WPolyVectorField& a);

WPolyVectorField lie_bracket(const WPolyVectorField& a, const WPolyVectorField& b);

WPolyVectorField vf_retrunc(const WPolyVectorField& x, int ntrunc);

// Splits into graded components: the monomial x^alpha d/dx_l sits in degree
// <alpha> - w_l.  Only nonzero components appear as keys.
std::map<long long, WPolyVectorField> vf_components(const WPolyVectorField& x);

// Exact pullback under the dilation by rational t != 0: the monomial
// x^alpha d/dx_l picks up t^{<alpha> - w_l}.
WPolyVectorField dilation_pullback(const Rat& t, const WPolyVectorField& x);

// Time-1 flow of sum_j s_j * fields[j] started at v = 0, as a jet in the
// passive block u and the flow coefficients s.  Each field lives over the
// (u, v) space (passive + moving variables) and must not move u.  The result
// maps (u, s) to the moving block: source weights are the u weights followed
// by coeff_w, target weights tgt_w.  Throws TruncationError if the iteration
// does not stabilize within n_iter_max steps (default ntrunc + 2).
WPolyMap flow_exp(const std::vector<WPolyVectorField>& fields, int passive,
                  const std::vector<int>& coeff_w, const std::vector<int>& tgt_w,
                  int ntrunc, int n_iter_max = -1);

// Rescaled remainder data: tilde satisfies
//   t^{-1} . base(x, t . y) = t^m * tilde(x, y, t)
// exactly, where the first nx source variables of base are carried along and
// the remaining block is dilated.  tilde's source appends one weight-0
// variable t.
struct ParamRemainder {
    WPolyMap base;
    int nx = 0;
    int m = 0;
    WPolyMap tilde;
};

// Splits off t^m from the rescaled remainder.  Each term of component k with
// dilated-block degree d must satisfy d - tgt_w[k] >= m; a violating term is
// reported by component and monomial in the thrown error.
ParamRemainder param_remainder(const WPolyMap& base, int nx, int m);

// Evaluates tilde at rational (x, y, t).
PointQ param_remainder_eval(const ParamRemainder& pr, const PointQ& x,
                            const PointQ& y, const Rat& t);

} // namespace carnot
