// Command line entry point: file parsing, dispatch, report emission.
// Exit codes: 0 all checks pass, 1 a check or guard fails, 2 bad input.
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "carnot/error.hpp"
#include "carnot/fixtures.hpp"
#include "carnot/groupoid.hpp"
#include "carnot/json_io.hpp"

using namespace carnot;
using nlohmann::json;

namespace {

struct Global {
    int trunc = -1;
    bool json_out = false;
    unsigned seed = 0;
    int jobs = 1;
};

Global g;

PointQ parse_point(const std::string& s, int n, const std::string& what) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if ((int)parts.size() != n)
        throw InputError(what + ": expected " + std::to_string(n) +
                         " comma-separated rationals, got '" + s + "'");
    PointQ x;
    x.reserve(n);
    for (const std::string& p : parts) x.push_back(rat_parse(p));
    return x;
}

std::string point_csv(const PointQ& x) {
    std::string out;
    for (size_t i = 0; i < x.size(); ++i) {
        if (i) out += ',';
        out += rat_str(x[i]);
    }
    return out;
}

json jpoint(const PointQ& x) {
    json a = json::array();
    for (const Rat& c : x) a.push_back(rat_str(c));
    return a;
}

json jpoly(const WPoly& p) { return json::parse(poly_json(p)); }

json jpolys(const std::vector<WPoly>& ps) {
    json a = json::array();
    for (const WPoly& p : ps) a.push_back(jpoly(p));
    return a;
}

json jmatrix(const QMat& m) {
    json a = json::array();
    for (const auto& row : m) a.push_back(jpoint(row));
    return a;
}

json jstrings(const std::vector<std::string>& v) {
    json a = json::array();
    for (const std::string& s : v) a.push_back(s);
    return a;
}

int finish(const json& report, bool ok, const std::string& text) {
    if (g.json_out)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << text;
    return ok ? 0 : 1;
}

std::string poly_lines(const std::string& tag, const std::vector<WPoly>& ps) {
    std::string out;
    for (size_t k = 0; k < ps.size(); ++k)
        out += tag + "_" + std::to_string(k + 1) + " = " + wp_str(ps[k]) + "\n";
    return out;
}

// Frame with the same fields anchored at a.
HFrame frame_at(const StructureFile& s, const PointQ& a) {
    return make_hframe(s.ws, s.frame, a);
}

std::vector<Rat> dyadic_ts(int k_from, int k_to) {
    std::vector<Rat> ts;
    for (int k = k_from; k <= k_to; ++k) ts.push_back(Rat(1, 1 << k));
    return ts;
}

// ---- validate ------------------------------------------------------------

std::vector<PointQ> small_grid(int n) {
    const std::vector<Rat> axis = {Rat(-1), Rat(0), Rat(1)};
    std::vector<PointQ> pts = {{}};
    for (int i = 0; i < n; ++i) {
        std::vector<PointQ> next;
        for (const PointQ& p : pts)
            for (const Rat& v : axis) {
                PointQ q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

std::vector<std::string> axiom_sweep(const NilpotentGroup& gr,
                                     const std::vector<PointQ>& pts,
                                     const std::vector<std::array<int, 3>>& triples,
                                     size_t begin, size_t end) {
    std::vector<std::string> bad;
    PointQ zero(gr.alg.ws.n, Rat(0));
    auto note = [&](const std::string& m) {
        if (bad.size() < 3) bad.push_back(m);
    };
    if (begin == 0) {
        for (const PointQ& p : pts) {
            if (group_mul(gr, p, zero) != p) note("unit fails on " + point_str(p));
            if (group_mul(gr, zero, p) != p) note("unit fails on " + point_str(p));
            if (group_mul(gr, p, group_inverse(p)) != zero)
                note("inverse fails on " + point_str(p));
        }
    }
    for (size_t i = begin; i < end && bad.size() < 3; ++i) {
        const auto& [a, b, c] = triples[i];
        const PointQ &x = pts[a], &y = pts[b], &z = pts[c];
        if (group_mul(gr, group_mul(gr, x, y), z) != group_mul(gr, x, group_mul(gr, y, z)))
            note("associativity fails on " + point_str(x) + " " + point_str(y) + " " +
                 point_str(z));
    }
    return bad;
}

int cmd_validate(const std::string& file) {
    StructureFile s = load_structure(file);
    json checks = json::array();
    bool all_ok = true;
    std::string text;
    auto add = [&](const std::string& name, bool ok,
                   const std::vector<std::string>& violations) {
        checks.push_back({{"name", name}, {"ok", ok}, {"violations", jstrings(violations)}});
        all_ok = all_ok && ok;
        text += (ok ? "ok   " : "FAIL ") + name + "\n";
        for (const std::string& v : violations) text += "     " + v + "\n";
    };

    bool frame_ok = false;
    HFrame f;
    try {
        f = structure_frame(s);
        frame_ok = true;
        add("frame", true, {});
    } catch (const Error& e) {
        add("frame", false, {e.what()});
    }
    if (frame_ok) {
        FiltrationReport rep = validate_filtration(f, g.trunc);
        std::vector<std::string> items = rep.violations;
        items.insert(items.end(), rep.notes.begin(), rep.notes.end());
        add("filtration", rep.ok, items);
    }
    if (s.has_constants) {
        AlgebraValidation av = validate_algebra(s.ws, s.constants);
        add("algebra", av.ok, av.violations);
        if (av.ok && frame_ok) {
            try {
                GradedNilpotentAlgebra alg = make_algebra(s.ws, s.constants);
                GradedNilpotentAlgebra tangent = tangent_algebra_at(f, s.basepoint);
                add("tangent_match", tangent.constants == alg.constants,
                    tangent.constants == alg.constants
                        ? std::vector<std::string>{}
                        : std::vector<std::string>{"declared constants disagree with the "
                                                   "frame's tangent algebra at the basepoint"});

                NilpotentGroup gr = make_group(alg);
                std::vector<PointQ> pts = small_grid(s.ws.n);
                size_t np = pts.size();
                std::vector<std::array<int, 3>> triples;
                if (np * np * np <= 300) {
                    for (size_t a = 0; a < np; ++a)
                        for (size_t b = 0; b < np; ++b)
                            for (size_t c = 0; c < np; ++c)
                                triples.push_back({(int)a, (int)b, (int)c});
                } else {
                    std::mt19937 rng(g.seed);
                    std::uniform_int_distribution<int> pick(0, (int)np - 1);
                    for (int i = 0; i < 300; ++i)
                        triples.push_back({pick(rng), pick(rng), pick(rng)});
                }
                int jobs = std::max(1, g.jobs);
                std::vector<std::future<std::vector<std::string>>> parts;
                size_t chunk = (triples.size() + jobs - 1) / jobs;
                for (int w = 0; w < jobs; ++w) {
                    size_t b = std::min(triples.size(), w * chunk);
                    size_t e = std::min(triples.size(), (w + 1) * chunk);
                    parts.push_back(std::async(std::launch::async, axiom_sweep,
                                               std::cref(gr), std::cref(pts),
                                               std::cref(triples), b, e));
                }
                std::vector<std::string> bad;
                for (auto& p : parts) {
                    std::vector<std::string> part = p.get();
                    bad.insert(bad.end(), part.begin(), part.end());
                }
                if (bad.size() > 3) bad.resize(3);
                add("group_axioms", bad.empty(), bad);
            } catch (const Error& e) {
                add("tangent_match", false, {e.what()});
            }
        }
    }
    json report = {{"file", file}, {"name", s.name}, {"ok", all_ok}, {"checks", checks}};
    return finish(report, all_ok, text);
}

// ---- group ----------------------------------------------------------------

int cmd_group_mul(const std::string& file, const std::string& xs, const std::string& ys) {
    StructureFile s = load_structure(file);
    NilpotentGroup gr = structure_group(s);
    PointQ x = parse_point(xs, s.ws.n, "x");
    PointQ y = parse_point(ys, s.ws.n, "y");
    PointQ p = group_mul(gr, x, y);
    return finish({{"product", jpoint(p)}}, true, point_csv(p) + "\n");
}

int cmd_group_inv(const std::string& file, const std::string& xs) {
    StructureFile s = load_structure(file);
    structure_group(s);
    PointQ x = parse_point(xs, s.ws.n, "x");
    PointQ p = group_inverse(x);
    return finish({{"inverse", jpoint(p)}}, true, point_csv(p) + "\n");
}

int cmd_group_table(const std::string& file) {
    StructureFile s = load_structure(file);
    GradedNilpotentAlgebra alg = s.has_constants
                                     ? make_algebra(s.ws, s.constants)
                                     : tangent_algebra_at(structure_frame(s), s.basepoint);
    json table = json::array();
    std::string text;
    for (const auto& [key, c] : alg.constants) {
        auto [i, j, k] = key;
        table.push_back({{"i", i + 1}, {"j", j + 1}, {"k", k + 1}, {"c", rat_str(c)}});
        text += "[e_" + std::to_string(i + 1) + ", e_" + std::to_string(j + 1) + "] = " +
                rat_str(c) + " e_" + std::to_string(k + 1) + "\n";
    }
    if (text.empty()) text = "abelian\n";
    return finish({{"name", s.name}, {"constants", table}}, true, text);
}

// ---- coords ---------------------------------------------------------------

PointQ anchor_of(const StructureFile& s, const std::string& at) {
    return at.empty() ? s.basepoint : parse_point(at, s.ws.n, "point");
}

int cmd_coords_eps(const std::string& file, const std::string& at) {
    StructureFile s = load_structure(file);
    EpsCarnotMap e = eps_carnot(structure_frame(s), anchor_of(s, at), g.trunc);
    std::cout << eps_json(e);
    return 0;
}

int cmd_coords_canonical(const std::string& file, const std::string& at) {
    StructureFile s = load_structure(file);
    CoordinateChange c =
        exp_coordinates(structure_frame(s), anchor_of(s, at), ExpMode::CanonicalFirstKind,
                        g.trunc);
    json report = {{"forward", jpolys(c.forward.comp)},
                   {"inverse", jpolys(c.inverse.comp)},
                   {"trunc", c.forward.ntrunc}};
    return finish(report, true,
                  poly_lines("forward", c.forward.comp) + poly_lines("inverse", c.inverse.comp));
}

int cmd_coords_check(const std::string& file, const std::string& at) {
    StructureFile s = load_structure(file);
    HFrame f = frame_at(s, anchor_of(s, at));
    PrivilegedReport pr = is_privileged(f, g.trunc);
    json report = {{"privileged",
                    {{"ok", pr.ok},
                     {"linearly_adapted", pr.linearly_adapted},
                     {"violations", jstrings(pr.violations)}}}};
    std::string text = std::string(pr.ok ? "ok   " : "FAIL ") + "privileged\n";
    for (const std::string& v : pr.violations) text += "     " + v + "\n";
    bool ok = pr.ok;
    if (pr.ok) {
        CarnotReport cr = is_carnot(f, g.trunc);
        report["carnot"] = {{"ok", cr.ok}, {"violations", jstrings(cr.violations)}};
        text += std::string(cr.ok ? "ok   " : "FAIL ") + "carnot\n";
        for (const std::string& v : cr.violations) text += "     " + v + "\n";
        ok = cr.ok;
    }
    report["ok"] = ok;
    return finish(report, ok, text);
}

// ---- diff and pansu --------------------------------------------------------

struct AnchoredMap {
    HFrame src;
    HFrame tgt;
    WPolyMap phi;
};

AnchoredMap anchor_map(const LoadedMap& m, const std::string& at) {
    PointQ a = at.empty() ? m.basepoint : parse_point(at, m.source.ws.n, "base");
    AnchoredMap r;
    r.src = make_hframe(m.source.ws, m.source.frame, a);
    r.tgt = make_hframe(m.target.ws, m.target.frame, wpmap_eval(m.phi, a));
    r.phi = m.phi;
    return r;
}

int cmd_diff_compute(const std::string& file, const std::string& at) {
    AnchoredMap m = anchor_map(load_map(file), at);
    WPolyMap d = carnot_differential(m.src, m.tgt, m.phi, g.trunc);
    QMat lin = linear_part(d);
    bool linear = d == wpmap_linear(lin, d.src_w, d.tgt_w, d.ntrunc);
    json report = {{"components", jpolys(d.comp)}, {"linear", linear}};
    std::string text = poly_lines("d", d.comp);
    if (linear) report["matrix"] = jmatrix(lin);
    return finish(report, true, text);
}

int cmd_diff_check(const std::string& file, const std::string& at) {
    LoadedMap lm = load_map(file);
    AnchoredMap m = anchor_map(lm, at);
    CarnotMapReport rep = is_carnot_map(m.src, m.tgt, m.phi, g.trunc);
    bool ok = rep.ok;
    json report = {{"carnot",
                    {{"ok", rep.ok},
                     {"graded_everywhere", rep.graded_everywhere},
                     {"violations", jstrings(rep.violations)}}}};
    std::string text = std::string(rep.ok ? "ok   " : "FAIL ") + "carnot_map\n";
    for (const std::string& v : rep.violations) text += "     " + v + "\n";
    if (rep.ok && lm.source.has_constants && lm.target.has_constants) {
        WPolyMap d = carnot_differential(m.src, m.tgt, m.phi, g.trunc);
        bool morph = differential_is_morphism(d, structure_group(lm.source),
                                              structure_group(lm.target));
        report["morphism"] = morph;
        text += std::string(morph ? "ok   " : "FAIL ") + "differential_morphism\n";
        ok = ok && morph;
    }
    report["ok"] = ok;
    return finish(report, ok, text);
}

int cmd_diff_osculate(const std::string& file, const std::string& at) {
    AnchoredMap m = anchor_map(load_map(file), at);
    CarnotMapReport rep = is_carnot_map(m.src, m.tgt, m.phi, g.trunc);
    if (!rep.ok) {
        std::string why = rep.violations.empty() ? "filtration condition fails"
                                                 : rep.violations.front();
        throw PreconditionError("no graded part to osculate: " + why);
    }
    MapOsculation o = map_osculation_residual(m.src, m.tgt, m.phi, g.trunc);
    json report = {{"residual", jpolys(o.residual.comp)},
                   {"order_positive", o.order_positive},
                   {"ok", o.order_positive}};
    if (o.order)
        report["order"] = *o.order;
    else
        report["order"] = nullptr;
    std::string text = "order " + (o.order ? std::to_string(*o.order) : "infinite") +
                       (o.order_positive ? " (>= 1)\n" : " (< 1)\n");
    return finish(report, o.order_positive, text);
}

int cmd_pansu(const std::string& file, const std::vector<std::string>& dirs,
              const std::string& at) {
    AnchoredMap m = anchor_map(load_map(file), at);
    std::vector<PointQ> probes;
    for (const std::string& d : dirs)
        probes.push_back(parse_point(d, m.src.ws.n, "direction"));
    PansuResult r = pansu_numeric(m.src, m.tgt, m.phi, probes, dyadic_ts(3, 10), g.trunc);
    double worst = r.samples.empty() ? 0.0 : r.samples.back().deviation;
    double min_slope = r.slopes.empty() ? 0.0 : r.slopes[0];
    for (double s : r.slopes) min_slope = std::min(min_slope, s);
    bool ok = r.exact || (worst <= 1e-6 && (r.slopes.empty() || min_slope >= 0.9));
    json samples = json::array();
    for (const PansuSample& s : r.samples)
        samples.push_back({{"t", rat_str(s.t)}, {"deviation", s.deviation}});
    json report = {{"differential", jpolys(r.differential.comp)},
                   {"samples", samples},
                   {"slopes", r.slopes},
                   {"exact", r.exact},
                   {"ok", ok}};
    std::string text;
    for (const PansuSample& s : r.samples)
        text += "t = " + rat_str(s.t) + "  deviation " + std::to_string(s.deviation) + "\n";
    text += r.exact ? "exact\n" : ("min slope " + std::to_string(min_slope) + "\n");
    return finish(report, ok, text);
}

// ---- groupoid ---------------------------------------------------------------

GroupoidChart chart_of(const StructureFile& s, const std::string& centre) {
    return make_groupoid_chart(structure_frame(s), anchor_of(s, centre), g.trunc);
}

json jop(const ChartOp& op) {
    return {{"at_zero", jpolys(op.at_zero.comp)},
            {"theta", jpolys(op.theta.comp)},
            {"full", jpolys(op.full.comp)}};
}

int cmd_groupoid_transition(const std::string& fa, const std::string& fb,
                            const std::string& ca, const std::string& cb) {
    StructureFile sa = load_structure(fa);
    StructureFile sb = load_structure(fb);
    ChartTransition tr = chart_transition(chart_of(sa, ca), chart_of(sb, cb));
    json report = {{"point", jpolys(tr.point.comp)}, {"fiber", jop(tr.op)}};
    std::string text = poly_lines("point", tr.point.comp) +
                       poly_lines("at_zero", tr.op.at_zero.comp) +
                       poly_lines("theta", tr.op.theta.comp);
    return finish(report, true, text);
}

int cmd_groupoid_mult(const std::string& file, const std::string& centre,
                      const std::vector<std::string>& eval) {
    StructureFile s = load_structure(file);
    GroupoidChart ch = chart_of(s, centre);
    ChartOp op = chart_mult(ch);
    json report = jop(op);
    std::string text = poly_lines("at_zero", op.at_zero.comp) +
                       poly_lines("theta", op.theta.comp);
    if (!eval.empty()) {
        int n = s.ws.n;
        PointQ u = parse_point(eval[0], n, "x");
        PointQ xi = parse_point(eval[1], n, "xi");
        PointQ eta = parse_point(eval[2], n, "eta");
        Rat t = rat_parse(eval[3]);
        PointQ args = eps_apply(ch.base, u);
        args.insert(args.end(), xi.begin(), xi.end());
        args.insert(args.end(), eta.begin(), eta.end());
        args.push_back(t);
        PointQ v = wpmap_eval(op.full, args);
        report["value"] = jpoint(v);
        text += "value = " + point_csv(v) + "\n";
    }
    return finish(report, true, text);
}

int cmd_groupoid_invert(const std::string& file, const std::string& centre,
                        const std::vector<std::string>& eval) {
    StructureFile s = load_structure(file);
    GroupoidChart ch = chart_of(s, centre);
    ChartOp op = chart_invert(ch);
    json report = jop(op);
    std::string text = poly_lines("at_zero", op.at_zero.comp) +
                       poly_lines("theta", op.theta.comp);
    if (!eval.empty()) {
        int n = s.ws.n;
        PointQ u = parse_point(eval[0], n, "x");
        PointQ xi = parse_point(eval[1], n, "xi");
        Rat t = rat_parse(eval[2]);
        PointQ args = eps_apply(ch.base, u);
        args.insert(args.end(), xi.begin(), xi.end());
        args.push_back(t);
        PointQ v = wpmap_eval(op.full, args);
        report["value"] = jpoint(v);
        text += "value = " + point_csv(v) + "\n";
    }
    return finish(report, true, text);
}

int cmd_groupoid_axioms(const std::string& file, const std::string& centre) {
    StructureFile s = load_structure(file);
    GroupoidAxioms ax = check_groupoid_axioms(chart_of(s, centre));
    json report = {{"identity_left", ax.identity_left},
                   {"identity_right", ax.identity_right},
                   {"inverse_ok", ax.inverse_ok},
                   {"assoc_ok", ax.assoc_ok},
                   {"notes", jstrings(ax.notes)},
                   {"ok", ax.all()}};
    std::string text;
    auto line = [&](const char* name, bool ok) {
        text += std::string(ok ? "ok   " : "FAIL ") + name + "\n";
    };
    line("identity_left", ax.identity_left);
    line("identity_right", ax.identity_right);
    line("inverse", ax.inverse_ok);
    line("associativity", ax.assoc_ok);
    return finish(report, ax.all(), text);
}

json jprobe(const ConvergenceProbe& p) {
    return {{"extrapolated", jpoint(p.extrapolated)},
            {"settled", p.settled},
            {"gap_sq", rat_str(p.gap_sq)}};
}

int cmd_groupoid_probe(const std::string& file, const std::string& xs,
                       const std::string& xis, const std::string& centre,
                       const std::string& second, const std::string& second_centre) {
    StructureFile s = load_structure(file);
    GroupoidChart ch = chart_of(s, centre);
    int n = s.ws.n;
    PointQ x = parse_point(xs, n, "x");
    PointQ xi = parse_point(xis, n, "xi");
    std::vector<Rat> ts = dyadic_ts(1, 8);
    std::vector<PointQ> ys;
    for (const Rat& t : ts) {
        GroupoidElem e = elem_from_chart(ch, ChartCoords{x, xi, t});
        ys.push_back(std::get<GroupoidPair>(e).y);
    }
    ConvergenceProbe pa = convergence_probe(ch, x, ys, ts);
    bool ok = pa.settled;
    json report = {{"first", jprobe(pa)}};
    std::string text = "first: " + point_csv(pa.extrapolated) +
                       (pa.settled ? " (settled)\n" : " (not settled)\n");
    if (!second.empty()) {
        StructureFile s2 = load_structure(second);
        GroupoidChart ch2 = chart_of(s2, second_centre.empty() ? centre : second_centre);
        ConvergenceProbe pb = convergence_probe(ch2, x, ys, ts);
        ChartTransition tr = chart_transition(ch, ch2);
        PointQ args = eps_apply(ch.base, x);
        args.insert(args.end(), pa.extrapolated.begin(), pa.extrapolated.end());
        PointQ converted = wpmap_eval(tr.op.at_zero, args);
        bool consistent = converted == pb.extrapolated;
        report["second"] = jprobe(pb);
        report["consistent"] = consistent;
        ok = ok && pb.settled && consistent;
        text += "second: " + point_csv(pb.extrapolated) +
                (pb.settled ? " (settled)\n" : " (not settled)\n");
        text += std::string("consistent: ") + (consistent ? "yes" : "no") + "\n";
    }
    report["ok"] = ok;
    return finish(report, ok, text);
}

// ---- heatlift ----------------------------------------------------------------

int cmd_heatlift(const std::string& file, const std::string& out, std::string name) {
    StructureFile s = load_structure(file);
    HFrame lifted = heat_lift_frame(structure_frame(s));
    if (name.empty()) name = s.name + "_heat";
    StructureFile ls = structure_from_frame(name, lifted);
    if (s.has_constants) {
        GradedNilpotentAlgebra alg = tangent_algebra_at(lifted, lifted.basepoint);
        ls.has_constants = true;
        for (const auto& [key, c] : alg.constants) {
            auto [i, j, k] = key;
            ls.constants.push_back({i, j, k, c});
        }
    }
    save_structure(ls, out);
    json report = {{"output", out}, {"name", name}, {"weights", ls.ws.w}, {"ok", true}};
    return finish(report, true, "wrote " + out + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact local computations on filtered manifolds and their tangent groupoids"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--trunc", g.trunc, "working truncation order (default: derived from the frame)");
    app.add_flag("--json", g.json_out, "emit a JSON report");
    app.add_option("--seed", g.seed, "seed for sampled sweeps");
    app.add_option("--jobs", g.jobs, "parallel workers for property sweeps")
        ->check(CLI::PositiveNumber);

    std::function<int()> run;
    std::string file, file2, xs, ys, at, centre, centre2, out, name;
    std::vector<std::string> extra;

    auto* validate = app.add_subcommand("validate", "check a structure file");
    validate->add_option("file", file)->required();
    validate->callback([&] { run = [&] { return cmd_validate(file); }; });

    auto* group = app.add_subcommand("group", "group operations from declared constants");
    auto* gmul = group->add_subcommand("mul", "product of two points");
    gmul->add_option("file", file)->required();
    gmul->add_option("x", xs)->required();
    gmul->add_option("y", ys)->required();
    gmul->callback([&] { run = [&] { return cmd_group_mul(file, xs, ys); }; });
    auto* ginv = group->add_subcommand("inv", "inverse of a point");
    ginv->add_option("file", file)->required();
    ginv->add_option("x", xs)->required();
    ginv->callback([&] { run = [&] { return cmd_group_inv(file, xs); }; });
    auto* gtable = group->add_subcommand("table", "structure constant table");
    gtable->add_option("file", file)->required();
    gtable->callback([&] { run = [&] { return cmd_group_table(file); }; });
    group->require_subcommand(1);

    auto* coords = app.add_subcommand("coords", "privileged and Carnot coordinates");
    auto* ceps = coords->add_subcommand("eps", "emit the eps chart at a point");
    ceps->add_option("file", file)->required();
    ceps->add_option("point", at);
    ceps->callback([&] { run = [&] { return cmd_coords_eps(file, at); }; });
    auto* ccan = coords->add_subcommand("canonical", "canonical coordinates of the first kind");
    ccan->add_option("file", file)->required();
    ccan->add_option("point", at);
    ccan->callback([&] { run = [&] { return cmd_coords_canonical(file, at); }; });
    auto* ccheck = coords->add_subcommand("check", "privileged and Carnot verdicts");
    ccheck->add_option("file", file)->required();
    ccheck->add_option("point", at);
    ccheck->callback([&] { run = [&] { return cmd_coords_check(file, at); }; });
    coords->require_subcommand(1);

    auto* diff = app.add_subcommand("diff", "Carnot differentials of maps");
    auto* dcomp = diff->add_subcommand("compute", "graded differential at the anchor");
    dcomp->add_option("file", file)->required();
    dcomp->add_option("--base", at, "anchor point (default: map basepoint)");
    dcomp->callback([&] { run = [&] { return cmd_diff_compute(file, at); }; });
    auto* dcheck = diff->add_subcommand("check", "filtration compatibility and morphism law");
    dcheck->add_option("file", file)->required();
    dcheck->add_option("--base", at);
    dcheck->callback([&] { run = [&] { return cmd_diff_check(file, at); }; });
    auto* dosc = diff->add_subcommand("osculate", "residual against the graded part");
    dosc->add_option("file", file)->required();
    dosc->add_option("--base", at);
    dosc->callback([&] { run = [&] { return cmd_diff_osculate(file, at); }; });
    diff->require_subcommand(1);

    auto* pansu = app.add_subcommand("pansu", "difference quotients against the differential");
    pansu->add_option("file", file)->required();
    pansu->add_option("directions", extra, "probe directions")->required();
    pansu->add_option("--base", at);
    pansu->callback([&] { run = [&] { return cmd_pansu(file, extra, at); }; });

    auto* gpd = app.add_subcommand("groupoid", "tangent groupoid charts and operations");
    auto* gtr = gpd->add_subcommand("transition", "chart transition tables");
    gtr->add_option("first", file)->required();
    gtr->add_option("second", file2)->required();
    gtr->add_option("--centre-a", centre);
    gtr->add_option("--centre-b", centre2);
    gtr->callback([&] { run = [&] { return cmd_groupoid_transition(file, file2, centre, centre2); }; });
    auto* gmult = gpd->add_subcommand("mult", "chart multiplication table");
    gmult->add_option("file", file)->required();
    gmult->add_option("--centre", centre);
    gmult->add_option("eval", extra, "x xi eta t evaluation point")->expected(0, 4);
    gmult->callback([&] { run = [&] {
        if (!extra.empty() && extra.size() != 4)
            throw InputError("evaluation needs x xi eta t");
        return cmd_groupoid_mult(file, centre, extra);
    }; });
    auto* ginvert = gpd->add_subcommand("invert", "chart inverse table");
    ginvert->add_option("file", file)->required();
    ginvert->add_option("--centre", centre);
    ginvert->add_option("eval", extra, "x xi t evaluation point")->expected(0, 3);
    ginvert->callback([&] { run = [&] {
        if (!extra.empty() && extra.size() != 3)
            throw InputError("evaluation needs x xi t");
        return cmd_groupoid_invert(file, centre, extra);
    }; });
    auto* gax = gpd->add_subcommand("axioms", "symbolic groupoid axioms on the chart");
    gax->add_option("file", file)->required();
    gax->add_option("--centre", centre);
    gax->callback([&] { run = [&] { return cmd_groupoid_axioms(file, centre); }; });
    auto* gprobe = gpd->add_subcommand("probe", "convergence probe at a base point");
    gprobe->add_option("file", file)->required();
    gprobe->add_option("x", xs)->required();
    gprobe->add_option("xi", ys)->required();
    gprobe->add_option("--centre", centre);
    gprobe->add_option("--second", file2, "second chart structure file");
    gprobe->add_option("--second-centre", centre2);
    gprobe->callback([&] { run = [&] {
        return cmd_groupoid_probe(file, xs, ys, centre, file2, centre2);
    }; });
    gpd->require_subcommand(1);

    auto* lift = app.add_subcommand("heatlift", "write the parabolic weight-2 lift");
    lift->add_option("file", file)->required();
    lift->add_option("output", out)->required();
    lift->add_option("--name", name);
    lift->callback([&] { run = [&] { return cmd_heatlift(file, out, name); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run();
    } catch (const InputError& e) {
        if (g.json_out) std::cout << json{{"error", e.what()}}.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        if (g.json_out) std::cout << json{{"error", e.what()}}.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
