#include "carnot/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "carnot/error.hpp"

namespace carnot {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw InputError(where + ": " + what);
}

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) fail(where, "unexpected key '" + item.key() + "'");
}

const json& member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
    return *it;
}

int int_at(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

Rat rat_at(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a rational string");
    try {
        return rat_parse(j.get<std::string>());
    } catch (const Error& e) {
        fail(where, e.what());
    }
}

PointQ point_at(const json& j, int n, const std::string& where) {
    if (!j.is_array() || (int)j.size() != n)
        fail(where, "expected an array of " + std::to_string(n) + " rationals");
    PointQ x;
    x.reserve(n);
    for (int i = 0; i < n; ++i)
        x.push_back(rat_at(j[i], where + "[" + std::to_string(i) + "]"));
    return x;
}

WPoly poly_at(const json& j, const std::vector<int>& w, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of terms");
    int n = (int)w.size();
    WPoly p = wp_zero(w, kExactTrunc);
    for (int ti = 0; ti < (int)j.size(); ++ti) {
        std::string tw = where + "[" + std::to_string(ti) + "]";
        expect_keys(j[ti], {"m", "c"}, tw);
        const json& m = member(j[ti], "m", tw);
        if (!m.is_array() || (int)m.size() != n)
            fail(tw + ".m", "expected " + std::to_string(n) + " exponents");
        MultiIndex alpha;
        alpha.reserve(n);
        for (int i = 0; i < n; ++i) {
            int e = int_at(m[i], tw + ".m[" + std::to_string(i) + "]");
            if (e < 0) fail(tw + ".m[" + std::to_string(i) + "]", "negative exponent");
            alpha.push_back(e);
        }
        Rat c = rat_at(member(j[ti], "c", tw), tw + ".c");
        if (c == 0) fail(tw + ".c", "zero coefficient");
        if (p.terms.count(alpha)) fail(tw + ".m", "repeated monomial");
        p.terms.emplace(std::move(alpha), std::move(c));
    }
    return p;
}

json poly_out(const WPoly& p) {
    json a = json::array();
    for (const auto& [alpha, c] : p.terms) a.push_back({{"m", alpha}, {"c", rat_str(c)}});
    return a;
}

json point_out(const PointQ& x) {
    json a = json::array();
    for (const Rat& c : x) a.push_back(rat_str(c));
    return a;
}

json parse_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(where, e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot read file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

StructureFile parse_structure(const json& j, const std::string& where) {
    expect_keys(j, {"name", "dim", "weights", "frame", "basepoint", "constants"}, where);
    StructureFile s;
    const json& name = member(j, "name", where);
    if (!name.is_string()) fail(where + ".name", "expected a string");
    s.name = name.get<std::string>();

    int dim = int_at(member(j, "dim", where), where + ".dim");
    const json& wj = member(j, "weights", where);
    if (!wj.is_array() || (int)wj.size() != dim)
        fail(where + ".weights", "expected " + std::to_string(dim) + " weights");
    std::vector<int> w;
    for (int i = 0; i < dim; ++i)
        w.push_back(int_at(wj[i], where + ".weights[" + std::to_string(i) + "]"));
    try {
        s.ws = make_weight_sequence(w);
    } catch (const Error& e) {
        fail(where + ".weights", e.what());
    }

    const json& fj = member(j, "frame", where);
    if (!fj.is_array() || (int)fj.size() != dim)
        fail(where + ".frame", "expected " + std::to_string(dim) + " vector fields");
    for (int k = 0; k < dim; ++k) {
        std::string fw = where + ".frame[" + std::to_string(k) + "]";
        if (!fj[k].is_array() || (int)fj[k].size() != dim)
            fail(fw, "expected " + std::to_string(dim) + " coefficient polynomials");
        WPolyVectorField x = vf_zero(w, kExactTrunc);
        for (int l = 0; l < dim; ++l)
            x.coeff[l] = poly_at(fj[k][l], w, fw + "[" + std::to_string(l) + "]");
        s.frame.push_back(std::move(x));
    }

    s.basepoint = j.contains("basepoint")
                      ? point_at(j["basepoint"], dim, where + ".basepoint")
                      : PointQ(dim, Rat(0));

    if (j.contains("constants")) {
        s.has_constants = true;
        const json& cj = j["constants"];
        if (!cj.is_array()) fail(where + ".constants", "expected an array");
        for (int t = 0; t < (int)cj.size(); ++t) {
            std::string cw = where + ".constants[" + std::to_string(t) + "]";
            expect_keys(cj[t], {"i", "j", "k", "c"}, cw);
            StructureConstant sc;
            sc.i = int_at(member(cj[t], "i", cw), cw + ".i") - 1;
            sc.j = int_at(member(cj[t], "j", cw), cw + ".j") - 1;
            sc.k = int_at(member(cj[t], "k", cw), cw + ".k") - 1;
            for (int idx : {sc.i, sc.j, sc.k})
                if (idx < 0 || idx >= dim) fail(cw, "index out of range 1.." + std::to_string(dim));
            sc.c = rat_at(member(cj[t], "c", cw), cw + ".c");
            if (sc.c == 0) fail(cw + ".c", "zero structure constant");
            s.constants.push_back(std::move(sc));
        }
    }
    return s;
}

json structure_out(const StructureFile& s) {
    json j;
    j["name"] = s.name;
    j["dim"] = s.ws.n;
    j["weights"] = s.ws.w;
    json frame = json::array();
    for (const WPolyVectorField& x : s.frame) {
        json vf = json::array();
        for (const WPoly& p : x.coeff) vf.push_back(poly_out(p));
        frame.push_back(std::move(vf));
    }
    j["frame"] = std::move(frame);
    j["basepoint"] = point_out(s.basepoint);
    if (s.has_constants) {
        json cj = json::array();
        for (const StructureConstant& sc : s.constants)
            cj.push_back({{"i", sc.i + 1}, {"j", sc.j + 1}, {"k", sc.k + 1},
                          {"c", rat_str(sc.c)}});
        j["constants"] = std::move(cj);
    }
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

StructureFile parse_structure_json(const std::string& text) {
    return parse_structure(parse_text(text, "structure"), "structure");
}

std::string structure_json(const StructureFile& s) { return dump(structure_out(s)); }

StructureFile load_structure(const std::string& path) {
    return parse_structure(parse_text(read_file(path), path), path);
}

void save_structure(const StructureFile& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write file");
    out << structure_json(s);
}

StructureFile structure_from_frame(const std::string& name, const HFrame& f) {
    for (const WPolyVectorField& x : f.fields)
        if (x.ntrunc < kExactTrunc)
            throw PreconditionError("structure files hold genuine polynomials; "
                                    "the frame is truncated");
    StructureFile s;
    s.name = name;
    s.ws = f.ws;
    s.frame = f.fields;
    s.basepoint = f.basepoint;
    return s;
}

HFrame structure_frame(const StructureFile& s) {
    return make_hframe(s.ws, s.frame, s.basepoint);
}

NilpotentGroup structure_group(const StructureFile& s) {
    if (!s.has_constants)
        throw InputError("structure '" + s.name + "' declares no constants");
    GradedNilpotentAlgebra alg = make_algebra(s.ws, s.constants);
    GradedNilpotentAlgebra tangent = tangent_algebra_at(structure_frame(s), s.basepoint);
    if (tangent.constants != alg.constants)
        throw InputError("structure '" + s.name +
                         "': declared constants disagree with the frame's tangent "
                         "algebra at the basepoint");
    return make_group(alg);
}

LoadedMap load_map(const std::string& path) {
    json j = parse_text(read_file(path), path);
    expect_keys(j, {"source", "target", "components", "basepoint"}, path);
    auto ref_at = [&](const char* key) {
        const json& r = member(j, key, path);
        if (!r.is_string()) fail(path + "." + key, "expected a structure file path");
        std::filesystem::path p = r.get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
        return p.string();
    };
    LoadedMap m;
    m.source = load_structure(ref_at("source"));
    m.target = load_structure(ref_at("target"));

    const json& comps = member(j, "components", path);
    int nt = m.target.ws.n;
    if (!comps.is_array() || (int)comps.size() != nt)
        fail(path + ".components", "expected " + std::to_string(nt) + " polynomials");
    m.phi.src_w = m.source.ws.w;
    m.phi.tgt_w = m.target.ws.w;
    m.phi.ntrunc = kExactTrunc;
    for (int k = 0; k < nt; ++k)
        m.phi.comp.push_back(poly_at(comps[k], m.phi.src_w,
                                     path + ".components[" + std::to_string(k) + "]"));

    m.basepoint = point_at(member(j, "basepoint", path), m.source.ws.n,
                           path + ".basepoint");
    return m;
}

std::string map_json(const std::string& source_ref, const std::string& target_ref,
                     const WPolyMap& phi, const PointQ& basepoint) {
    json j;
    j["source"] = source_ref;
    j["target"] = target_ref;
    json comps = json::array();
    for (const WPoly& p : phi.comp) comps.push_back(poly_out(p));
    j["components"] = std::move(comps);
    j["basepoint"] = point_out(basepoint);
    return dump(j);
}

std::string poly_json(const WPoly& p) { return dump(poly_out(p)); }

std::string eps_json(const EpsCarnotMap& e) {
    json j;
    j["weights"] = e.ws.w;
    j["basepoint"] = point_out(e.basepoint);
    json lin;
    json rows = json::array();
    for (const auto& row : e.t.a) rows.push_back(point_out(row));
    lin["a"] = std::move(rows);
    lin["b"] = point_out(e.t.b);
    j["linear"] = std::move(lin);
    json hat = json::array();
    for (const WPoly& p : e.hat.comp) hat.push_back(poly_out(p));
    j["hat"] = std::move(hat);
    return dump(j);
}

EpsCarnotMap eps_from_json(const std::string& text) {
    json j = parse_text(text, "eps");
    expect_keys(j, {"weights", "basepoint", "linear", "hat"}, "eps");
    const json& wj = member(j, "weights", "eps");
    if (!wj.is_array()) fail("eps.weights", "expected an array");
    std::vector<int> w;
    for (int i = 0; i < (int)wj.size(); ++i)
        w.push_back(int_at(wj[i], "eps.weights[" + std::to_string(i) + "]"));
    EpsCarnotMap e;
    try {
        e.ws = make_weight_sequence(w);
    } catch (const Error& ex) {
        fail("eps.weights", ex.what());
    }
    int n = e.ws.n;
    e.basepoint = point_at(member(j, "basepoint", "eps"), n, "eps.basepoint");
    const json& lin = member(j, "linear", "eps");
    expect_keys(lin, {"a", "b"}, "eps.linear");
    const json& rows = member(lin, "a", "eps.linear");
    if (!rows.is_array() || (int)rows.size() != n)
        fail("eps.linear.a", "expected " + std::to_string(n) + " rows");
    for (int i = 0; i < n; ++i)
        e.t.a.push_back(point_at(rows[i], n, "eps.linear.a[" + std::to_string(i) + "]"));
    e.t.b = point_at(member(lin, "b", "eps.linear"), n, "eps.linear.b");
    const json& hat = member(j, "hat", "eps");
    if (!hat.is_array() || (int)hat.size() != n)
        fail("eps.hat", "expected " + std::to_string(n) + " polynomials");
    e.hat.src_w = e.ws.w;
    e.hat.tgt_w = e.ws.w;
    e.hat.ntrunc = kExactTrunc;
    for (int k = 0; k < n; ++k)
        e.hat.comp.push_back(poly_at(hat[k], e.ws.w, "eps.hat[" + std::to_string(k) + "]"));
    return e;
}

} // namespace carnot
