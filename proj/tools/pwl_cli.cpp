#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pwl/analysis.hpp"
#include "pwl/bmc.hpp"
#include "pwl/dnn.hpp"
#include "pwl/io.hpp"
#include "pwl/patch.hpp"
#include "pwl/svg.hpp"
#include "pwl/symbolic.hpp"

namespace fs = std::filesystem;
using namespace pwl;

namespace {

std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void cmd_partitions(const std::string& net_path, const std::string& domain_path,
                    const std::string& out_dir) {
    Network net = load_network_file(net_path);
    PlanePolytope domain = load_polytope_file(domain_path);
    SymbolicRep rep = fhat(net, domain);
    ensure_dir(out_dir);
    write_file(join(out_dir, "partitions.json"), dump_json(rep));

    SvgPlot plot;
    for (const auto& part : rep.partitions)
        plot.add_polygon(part.poly.vertices, SvgPlot::palette()[0], "white", 1.5);
    write_file(join(out_dir, "partitions.svg"), plot.render());
    std::cout << "partitions: " << rep.partitions.size() << "\n";
}

void cmd_classify(const std::string& net_path, const std::string& domain_path,
                  const std::string& out_dir) {
    Network net = load_network_file(net_path);
    PlanePolytope domain = load_polytope_file(domain_path);
    SymbolicRep rep = fhat(net, domain);
    const int classes = net.output_dim();
    if (classes > static_cast<int>(SvgPlot::palette().size()))
        throw InputError("classification plots support at most 8 classes");
    std::vector<LabeledRegion> regions = classify(rep, classes);
    ensure_dir(out_dir);

    nlohmann::json arr = nlohmann::json::array();
    SvgPlot plot;
    for (const auto& r : regions) {
        nlohmann::json jr;
        jr["label"] = r.label;
        jr["vertices_2d"] = nlohmann::json::array();
        for (const auto& v : r.poly.vertices) jr["vertices_2d"].push_back({v.x(), v.y()});
        arr.push_back(std::move(jr));
        plot.add_polygon(r.poly.vertices, SvgPlot::palette()[r.label], "white", 1.0);
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (int k = 0; k < classes; ++k)
        legend.emplace_back("class " + std::to_string(k), SvgPlot::palette()[k]);
    plot.add_legend(legend);
    write_file(join(out_dir, "classify.json"), arr.dump(2) + "\n");
    write_file(join(out_dir, "classify.svg"), plot.render());
    std::cout << "regions: " << regions.size() << "\n";
}

void cmd_precond(const std::string& net_path, const std::string& domain_path,
                 const std::string& spec_path, const std::string& out_dir) {
    Network net = load_network_file(net_path);
    PlanePolytope domain = load_polytope_file(domain_path);
    HalfspaceSet y = load_halfspaces_file(spec_path, tolerances().strict_margin);
    SymbolicRep rep = fhat(net, domain);
    std::vector<PlanePolytope> regions = weakest_pre(rep, y);
    ensure_dir(out_dir);

    nlohmann::json arr = nlohmann::json::array();
    SvgPlot plot;
    plot.add_polygon(domain.vertices, "#eeeeee", "black", 1.0);
    double total = 0.0;
    for (const auto& poly : regions) {
        nlohmann::json jp;
        jp["vertices_2d"] = nlohmann::json::array();
        for (const auto& v : poly.vertices) jp["vertices_2d"].push_back({v.x(), v.y()});
        arr.push_back(std::move(jp));
        plot.add_polygon(poly.vertices, SvgPlot::palette()[1], "white", 1.0);
        total += area(poly);
    }
    write_file(join(out_dir, "precond.json"), arr.dump(2) + "\n");
    write_file(join(out_dir, "precond.svg"), plot.render());
    std::cout << "regions: " << regions.size() << " area: " << fmt9(total) << "\n";
}

void cmd_bmc(const std::string& config_path, const std::string& out_dir, int steps_override,
             bool frontier_svg) {
    BMCProblem problem = load_bmc_config_file(config_path);
    if (steps_override > 0) problem.steps = steps_override;
    BMCResult result = run_bmc(problem);
    ensure_dir(out_dir);
    write_file(join(out_dir, "bmc_result.json"), bmc_result_json(result));
    if (frontier_svg) {
        for (std::size_t s = 0; s < result.frontiers.size(); ++s) {
            SvgPlot plot;
            plot.add_polygon(problem.safe.polygon().vertices, "none", "black", 1.5);
            plot.add_polygon(problem.initial.polygon().vertices, "none", "#2ca02c", 1.5);
            for (const auto& poly : result.frontiers[s])
                plot.add_polygon(poly.vertices, SvgPlot::palette()[1], "white", 1.0);
            write_file(join(out_dir, "frontier_step_" + std::to_string(s + 1) + ".svg"),
                       plot.render());
        }
    }
    std::cout << (result.status == BMCResult::Status::Verified ? "verified" : "violated");
    if (result.inductive) std::cout << " (inductive)";
    if (result.witness)
        std::cout << " step " << result.violation_step << " witness (" << fmt9(result.witness->x())
                  << ", " << fmt9(result.witness->y()) << ")";
    std::cout << "\n";
}

void classification_svg(const MaskingNetwork& mnet, const PlanePolytope& domain,
                        const std::string& path) {
    SymbolicRep rep = fhat_masking(mnet, domain);
    const int classes = mnet.output_dim();
    std::vector<LabeledRegion> regions = classify(rep, classes);
    SvgPlot plot;
    for (const auto& r : regions)
        plot.add_polygon(r.poly.vertices,
                         SvgPlot::palette()[r.label % SvgPlot::palette().size()], "white", 1.0);
    std::vector<std::pair<std::string, std::string>> legend;
    for (int k = 0; k < classes && k < 8; ++k)
        legend.emplace_back("class " + std::to_string(k), SvgPlot::palette()[k]);
    plot.add_legend(legend);
    write_file(path, plot.render());
}

void cmd_patch(const std::string& net_path, const std::string& spec_path,
               const std::string& domain_path, int layer, int iterations,
               const std::string& out_dir) {
    Network net = load_network_file(net_path);
    PatchSpec spec = load_patch_spec_file(spec_path, tolerances().strict_margin);
    MaskingNetwork mnet = to_masking(net);

    if (layer < 0) {
        // Default to the last dense layer.
        for (int i = static_cast<int>(mnet.layers.size()) - 1; i >= 0; --i) {
            if (std::holds_alternative<MaskingNetwork::MaskedDense>(mnet.layers[i])) {
                layer = i;
                break;
            }
        }
    }
    std::vector<WeightId> candidates = layer_candidates(mnet, layer);
    PatchResult result = greedy_patch(mnet, spec, candidates, iterations);
    VerifyReport report = verify_patch(result.network, mnet, spec);

    ensure_dir(out_dir);
    write_file(join(out_dir, "patched_network.json"), masking_network_json(result.network));

    std::ostringstream csv;
    csv << "iteration,weight_id,delta,satisfied,total,percent\n";
    for (const auto& h : result.history) {
        const double pct =
            h.total ? 100.0 * static_cast<double>(h.satisfied) / static_cast<double>(h.total)
                    : 100.0;
        csv << h.iteration << "," << (h.iteration == 0 ? std::string("-") : to_string(h.weight))
            << "," << fmt9(h.delta) << "," << h.satisfied << "," << h.total << "," << fmt9(pct)
            << "\n";
    }
    write_file(join(out_dir, "history.csv"), csv.str());

    nlohmann::json jr;
    jr["all_satisfied"] = report.all_satisfied;
    jr["satisfied_pairs"] = report.satisfied_pairs;
    jr["pairs"] = nlohmann::json::array();
    for (const auto& p : report.pairs)
        jr["pairs"].push_back({{"satisfied", p.satisfied},
                               {"satisfied_vertices", p.satisfied_vertices},
                               {"total_vertices", p.total_vertices}});
    jr["applied"] = nlohmann::json::array();
    for (const auto& [w, d] : result.applied)
        jr["applied"].push_back({{"weight", to_string(w)}, {"delta", d}});
    write_file(join(out_dir, "patch_report.json"), jr.dump(2) + "\n");

    if (!domain_path.empty()) {
        PlanePolytope domain = load_polytope_file(domain_path);
        classification_svg(mnet, domain, join(out_dir, "classify_before.svg"));
        classification_svg(result.network, domain, join(out_dir, "classify_after.svg"));
    }
    std::cout << "satisfied " << result.history.back().satisfied << "/"
              << result.history.back().total << " after " << result.applied.size()
              << " change(s)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact symbolic analysis of piecewise-linear networks over 2D input polytopes"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand name

    double tol_geo = tolerances().geo;
    std::size_t max_partitions = caps().max_partitions;
    unsigned seed = 0;  // reserved for sampling-based reports
    app.add_option("--tol", tol_geo, "geometry tolerance");
    app.add_option("--max-partitions", max_partitions, "partition cap");
    app.add_option("--seed", seed, "seed for sampling-based reports");

    std::string net_path, domain_path, spec_path, dynamics_path, out_dir = ".";
    int steps = 0, layer = -1, iterations = 100;
    bool frontier_svg = false;

    auto* partitions = app.add_subcommand("partitions", "dump the exact linear partitions");
    partitions->add_option("--net", net_path)->required();
    partitions->add_option("--domain", domain_path)->required();
    partitions->add_option("--out-dir", out_dir);

    auto* classify_cmd = app.add_subcommand("classify", "argmax classification regions");
    classify_cmd->add_option("--net", net_path)->required();
    classify_cmd->add_option("--domain", domain_path)->required();
    classify_cmd->add_option("--out-dir", out_dir);

    auto* precond = app.add_subcommand("precond", "weakest precondition of an output region");
    precond->add_option("--net", net_path)->required();
    precond->add_option("--domain", domain_path)->required();
    precond->add_option("--spec", spec_path)->required();
    precond->add_option("--out-dir", out_dir);

    auto* bmc_cmd = app.add_subcommand("bmc", "bounded model checking of a 2D controller");
    bmc_cmd->add_option("--dynamics", dynamics_path, "problem config JSON")->required();
    bmc_cmd->add_option("--steps", steps, "override the step budget");
    bmc_cmd->add_flag("--frontier-svg", frontier_svg, "emit per-step frontier SVGs");
    bmc_cmd->add_option("--out-dir", out_dir);

    auto* patch_cmd = app.add_subcommand("patch", "greedy weight-wise network repair");
    patch_cmd->add_option("--net", net_path)->required();
    patch_cmd->add_option("--spec", spec_path)->required();
    patch_cmd->add_option("--domain", domain_path, "domain for before/after plots");
    patch_cmd->add_option("--layer", layer, "dense layer to patch (default: last)");
    patch_cmd->add_option("--iterations", iterations);
    patch_cmd->add_option("--out-dir", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    tolerances().geo = tol_geo;
    caps().max_partitions = max_partitions;

    try {
        if (partitions->parsed()) cmd_partitions(net_path, domain_path, out_dir);
        if (classify_cmd->parsed()) cmd_classify(net_path, domain_path, out_dir);
        if (precond->parsed()) cmd_precond(net_path, domain_path, spec_path, out_dir);
        if (bmc_cmd->parsed()) cmd_bmc(dynamics_path, out_dir, steps, frontier_svg);
        if (patch_cmd->parsed()) cmd_patch(net_path, spec_path, domain_path, layer, iterations, out_dir);
    } catch (const CapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
