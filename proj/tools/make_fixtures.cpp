// Regenerates the bundled example files.  Usage: carnot-make-fixtures <dir>
#include <fstream>
#include <iostream>
#include <string>

#include "carnot/error.hpp"
#include "carnot/fixtures.hpp"
#include "carnot/json_io.hpp"

using namespace carnot;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write file");
    out << text;
}

StructureFile with_constants(StructureFile s, const std::vector<StructureConstant>& cs) {
    s.has_constants = true;
    s.constants = cs;
    return s;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: carnot-make-fixtures <dir>\n";
        return 2;
    }
    std::string dir = argv[1];
    auto path = [&](const std::string& name) { return dir + "/" + name; };

    save_structure(structure_from_frame("abelian2", abelian2_frame()), path("abelian2.json"));
    save_structure(with_constants(structure_from_frame("heisenberg3", heisenberg3_frame()),
                                  {{0, 1, 2, Rat(1)}}),
                   path("heisenberg3.json"));
    save_structure(with_constants(structure_from_frame("engel4", engel4_frame()),
                                  {{0, 1, 2, Rat(1)}, {0, 2, 3, Rat(1)}}),
                   path("engel4.json"));
    save_structure(structure_from_frame("heisenberg3_polarized", heisenberg3_polarized_frame()),
                   path("heisenberg3_polarized.json"));
    save_structure(structure_from_frame("engel4_polarized", engel4_polarized_frame()),
                   path("engel4_polarized.json"));
    save_structure(structure_from_frame("heisenberg3_perturbed", heisenberg3_perturbed_frame()),
                   path("heisenberg3_perturbed.json"));
    save_structure(structure_from_frame("heisenberg3_sheared",
                                        frame_shear_first_layer(heisenberg3_frame())),
                   path("heisenberg3_sheared.json"));
    save_structure(structure_from_frame("heisenberg3_perturbed_sheared",
                                        frame_shear_first_layer(heisenberg3_perturbed_frame())),
                   path("heisenberg3_perturbed_sheared.json"));
    save_structure(structure_from_frame("nonprivileged3", nonprivileged3_frame()),
                   path("nonprivileged3.json"));

    PointQ zero3(3, Rat(0));
    write_text(path("shear1.json"),
               map_json("heisenberg3.json", "heisenberg3.json", heisenberg_shear(Rat(1)), zero3));
    write_text(path("shear_small.json"),
               map_json("heisenberg3.json", "heisenberg3.json",
                        heisenberg_shear(Rat(1, 100000)), zero3));
    write_text(path("dilation2.json"),
               map_json("heisenberg3.json", "heisenberg3.json", heisenberg_dilation(Rat(2)), zero3));
    write_text(path("swap.json"),
               map_json("heisenberg3.json", "heisenberg3.json", heisenberg_swap(), zero3));
    write_text(path("proj_heis_ab.json"),
               map_json("heisenberg3.json", "abelian2.json", heisenberg_projection(), zero3));
    write_text(path("notcarnot.json"),
               map_json("heisenberg3.json", "heisenberg3.json", weight_raising_map(), zero3));

    // Hand-rolled invalid inputs; these never pass parsing or validation.
    write_text(path("badweights.json"), R"({
  "name": "badweights",
  "dim": 2,
  "weights": [2, 1],
  "frame": [
    [[{"c": "1", "m": [0, 0]}], []],
    [[], [{"c": "1", "m": [0, 0]}]]
  ]
}
)");
    write_text(path("badconstants.json"), R"({
  "name": "badconstants",
  "dim": 3,
  "weights": [1, 1, 2],
  "frame": [
    [[{"c": "1", "m": [0, 0, 0]}], [], [{"c": "-1/2", "m": [0, 1, 0]}]],
    [[], [{"c": "1", "m": [0, 0, 0]}], [{"c": "1/2", "m": [1, 0, 0]}]],
    [[], [], [{"c": "1", "m": [0, 0, 0]}]]
  ],
  "constants": [{"c": "1", "i": 1, "j": 3, "k": 2}]
}
)");
    std::cout << "wrote fixtures to " << dir << "\n";
    return 0;
}
