#pragma once

#include <string>
#include <vector>

#include "carnot/coords.hpp"

namespace carnot {

// On-disk formats.  Rationals are strings "p" or "p/q" in lowest terms with
// q > 0; a polynomial is an array of {"m": [e_1..e_n], "c": rational} terms
// with no zero coefficients and no repeated monomials, emitted in lex order
// of m.  Structure and map files denote genuine polynomials, so parsing
// always yields exact (kExactTrunc) objects, and emission sorts object keys,
// making serialize(parse(text)) canonical.

// {"name", "dim", "weights", "frame", "basepoint"?, "constants"?} where
// frame holds n vector fields as arrays of n coefficient polynomials and
// constants lists brackets [e_i, e_j] = c e_k with 1-based i, j, k.
struct StructureFile {
    std::string name;
    WeightSequence ws;
    std::vector<WPolyVectorField> frame;
    PointQ basepoint;
    bool has_constants = false;
    std::vector<StructureConstant> constants;  // 0-based in memory

    bool operator==(const StructureFile&) const = default;
};

StructureFile parse_structure_json(const std::string& text);
std::string structure_json(const StructureFile& s);
StructureFile load_structure(const std::string& path);
void save_structure(const StructureFile& s, const std::string& path);

StructureFile structure_from_frame(const std::string& name, const HFrame& f);

HFrame structure_frame(const StructureFile& s);

// Group built from the declared constants.  When the file also carries a
// frame, its tangent algebra at the basepoint must reproduce them.
NilpotentGroup structure_group(const StructureFile& s);

// {"source", "target", "components", "basepoint"} with structure paths
// resolved relative to the map file's directory.
struct LoadedMap {
    StructureFile source;
    StructureFile target;
    WPolyMap phi;
    PointQ basepoint;
};

LoadedMap load_map(const std::string& path);
std::string map_json(const std::string& source_ref, const std::string& target_ref,
                     const WPolyMap& phi, const PointQ& basepoint);

// Bare polynomial array, canonical form.
std::string poly_json(const WPoly& p);

// {"basepoint", "hat", "linear": {"a", "b"}, "weights"}; parse(emit(e)) == e.
std::string eps_json(const EpsCarnotMap& e);
EpsCarnotMap eps_from_json(const std::string& text);

} // namespace carnot
