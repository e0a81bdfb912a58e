#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carnot/carnot_structure.hpp"
#include "carnot/coords.hpp"
#include "carnot/nilgroup.hpp"

namespace carnot {

// Maps between framed filtered spaces. A map is a WPolyMap phi over the
// source coordinates; it must send the source basepoint to the target
// basepoint. Truncated maps must be constant-free with both frames based
// at 0; exact maps may carry constant terms and are recentred internally.

// phi(a + x) - phi(a) as a constant-free map. Needs an exact phi when a
// or the image constant is nonzero.
WPolyMap recentre_map(const WPolyMap& phi, const PointQ& a);

// Coefficients c[k][j] with (phi_* X_j)(phi(x)) = sum_k c[k][j](x) X'_k.
// Rows index target fields, columns source fields; entries are jets over
// the source coordinates centred at the source basepoint.
PolyMat frame_decompose(const HFrame& src, const HFrame& tgt,
                        const WPolyMap& phi, int ntrunc = -1);

struct CarnotMapReport {
    bool ok = false;                 // forbidden coefficients vanish at the basepoint
    bool graded_everywhere = false;  // forbidden coefficients vanish as jets
    std::vector<std::string> violations;
};

// Forbidden pairs are (j, k) with w'_k > w_j: a map respects the
// filtration at the basepoint when every such c_jk vanishes there.
CarnotMapReport is_carnot_map(const HFrame& src, const HFrame& tgt,
                              const WPolyMap& phi, int ntrunc = -1);

// phi conjugated into the eps coordinates at the source basepoint and its
// image: eps'_{phi(a)} o phi o eps_a^{-1}. Exact inputs give an exact map.
WPolyMap map_in_eps_charts(const HFrame& src, const HFrame& tgt,
                           const WPolyMap& phi, int ntrunc = -1);

// Weight-homogeneous degree-0 part of the map in eps charts: the graded
// differential at the basepoint. Throws when the filtration condition
// fails at the basepoint.
WPolyMap carnot_differential(const HFrame& src, const HFrame& tgt,
                             const WPolyMap& phi, int ntrunc = -1);

// law' o (d, d) == d o law, checked symbolically on exact maps.
bool differential_is_morphism(const WPolyMap& d, const NilpotentGroup& g_src,
                              const NilpotentGroup& g_tgt);

struct MapOsculation {
    WPolyMap residual;               // map in eps charts minus its degree-0 part
    std::optional<long long> order;  // lowest graded order of the residual
    bool order_positive = false;
};

MapOsculation map_osculation_residual(const HFrame& src, const HFrame& tgt,
                                      const WPolyMap& phi, int ntrunc = -1);

struct PansuSample {
    Rat t;
    Rat deviation_sq;  // squared euclidean size of the rescaled deviation, exact
    double deviation = 0.0;
};

struct PansuResult {
    WPolyMap differential;
    std::vector<PansuSample> samples;
    std::vector<double> slopes;  // decay exponents between consecutive samples
    bool exact = false;          // every sampled deviation is exactly zero
};

// Rescaled difference quotients delta'_{1/t}(phi_eps(delta_t y)) - d(y)
// over the probe points, evaluated in exact arithmetic per t. Requires an
// exact phi and exact frames.
PansuResult pansu_numeric(const HFrame& src, const HFrame& tgt,
                          const WPolyMap& phi, const std::vector<PointQ>& probes,
                          const std::vector<Rat>& t_seq, int ntrunc = -1);

}  // namespace carnot
