#pragma once

#include <string>
#include <vector>

#include "pwl/bmc.hpp"
#include "pwl/geom2d.hpp"
#include "pwl/patch.hpp"

namespace pwl {

// Polygon JSON: {"ambient_dim", "origin", "basis", "vertices_2d"}. The
// loader also accepts the convenience form {"ambient_vertices": [[...]]}.
PlanePolytope load_polytope_json(const std::string& text);
PlanePolytope load_polytope_file(const std::string& path);
std::string save_polytope_json(const PlanePolytope& poly);

// Patch spec JSON: list of {"input_polytope": [[ambient vertex]...],
// "output_halfspaces": [{"a": [...], "b": x}]} or
// {"input_polytope": ..., "argmax_class": k, "num_classes": m}.
PatchSpec load_patch_spec_json(const std::string& text, double strict_margin = 0.0);
PatchSpec load_patch_spec_file(const std::string& path, double strict_margin = 0.0);

// Halfspace-set JSON for precondition queries: {"halfspaces": [{"a", "b"}]}
// or {"argmax_class": k, "num_classes": m}.
HalfspaceSet load_halfspaces_json(const std::string& text, double strict_margin = 0.0);
HalfspaceSet load_halfspaces_file(const std::string& path, double strict_margin = 0.0);

// BMC problem config: {"controller": path, "A", "B", "c", "s_i": {"lo","hi"},
// "s_s": {"lo","hi"}, "steps"}.
BMCProblem load_bmc_config_file(const std::string& path);

std::string bmc_result_json(const BMCResult& result);

std::string masking_network_json(const MaskingNetwork& mnet);
MaskingNetwork load_masking_network_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pwl
