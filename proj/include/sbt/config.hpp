#ifndef SBT_CONFIG_HPP
#define SBT_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "sbt/analysis.hpp"
#include "sbt/errors.hpp"
#include "sbt/geometry.hpp"
#include "sbt/io.hpp"

// Strict JSON ingestion: unknown keys are errors, malformed documents are
// reported with line/column.
namespace sbt {

using json = nlohmann::json;

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InputError("malformed JSON in '" + path.string() + "' at line " + std::to_string(line) +
                         ", column " + std::to_string(col) + ": " + e.what());
    }
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) throw InputError(ctx + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + ctx);
    }
}

inline double get_number(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw InputError("missing key '" + key + "' in " + ctx);
    if (!j[key].is_number()) throw InputError("key '" + key + "' in " + ctx + " must be a number");
    return j[key].get<double>();
}

inline Vec3 get_vec3(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw InputError("key '" + key + "' in " + ctx + " must be an array of 3 numbers");
    return Vec3{j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

inline GeometryDoc geometry_doc_from_json(const json& j) {
    check_keys(j, {"centerline", "radius", "stretch", "frame"}, "geometry document");
    GeometryDoc doc;
    if (!j.contains("centerline") || !j.contains("radius"))
        throw InputError("geometry document needs 'centerline' and 'radius'");

    const json& cl = j["centerline"];
    if (!cl.contains("kind")) throw InputError("centerline needs a 'kind'");
    doc.centerline_kind = cl["kind"].get<std::string>();
    if (doc.centerline_kind == "straight") {
        check_keys(cl, {"kind", "direction"}, "centerline");
        if (cl.contains("direction")) doc.direction = get_vec3(cl, "direction", "centerline");
    } else if (doc.centerline_kind == "circular-arc") {
        check_keys(cl, {"kind", "radius"}, "centerline");
        doc.arc_radius = get_number(cl, "radius", "centerline");
    } else if (doc.centerline_kind == "spline") {
        check_keys(cl, {"kind", "nodes"}, "centerline");
        if (!cl.contains("nodes") || !cl["nodes"].is_array())
            throw InputError("spline centerline needs a 'nodes' array");
        for (const auto& node : cl["nodes"]) {
            if (!node.is_array() || node.size() != 3)
                throw InputError("spline nodes must be arrays of 3 numbers");
            doc.spline_nodes.push_back(Vec3{node[0].get<double>(), node[1].get<double>(), node[2].get<double>()});
        }
    } else {
        throw InputError("unknown centerline kind '" + doc.centerline_kind + "'");
    }

    const json& rad = j["radius"];
    check_keys(rad, {"kind", "epsilon"}, "radius");
    if (!rad.contains("kind")) throw InputError("radius needs a 'kind'");
    doc.radius_kind = rad["kind"].get<std::string>();
    doc.epsilon = get_number(rad, "epsilon", "radius");
    if (!(doc.epsilon > 0.0 && doc.epsilon <= 0.25))
        throw InputError("radius.epsilon must lie in (0, 0.25]");

    if (j.contains("stretch")) {
        check_keys(j["stretch"], {"kind"}, "stretch");
        if (j["stretch"].contains("kind")) doc.stretch_kind = j["stretch"]["kind"].get<std::string>();
    }
    if (j.contains("frame")) {
        check_keys(j["frame"], {"step", "seed_normal"}, "frame");
        if (j["frame"].contains("step")) doc.frame_step = get_number(j["frame"], "step", "frame");
        if (j["frame"].contains("seed_normal")) {
            doc.seed_normal = get_vec3(j["frame"], "seed_normal", "frame");
            doc.seed_normal_set = true;
        }
    }
    return doc;
}

inline json geometry_doc_to_json(const GeometryDoc& doc) {
    json j;
    if (doc.centerline_kind == "straight") {
        j["centerline"] = {{"kind", "straight"},
                           {"direction", {doc.direction.x, doc.direction.y, doc.direction.z}}};
    } else if (doc.centerline_kind == "circular-arc") {
        j["centerline"] = {{"kind", "circular-arc"}, {"radius", doc.arc_radius}};
    } else {
        json nodes = json::array();
        for (const auto& n : doc.spline_nodes) nodes.push_back({n.x, n.y, n.z});
        j["centerline"] = {{"kind", "spline"}, {"nodes", nodes}};
    }
    j["radius"] = {{"kind", doc.radius_kind}, {"epsilon", doc.epsilon}};
    j["stretch"] = {{"kind", doc.stretch_kind}};
    j["frame"] = {{"step", doc.frame_step}};
    if (doc.seed_normal_set)
        j["frame"]["seed_normal"] = {doc.seed_normal.x, doc.seed_normal.y, doc.seed_normal.z};
    return j;
}

inline ForceSpec force_spec_from_string(const std::string& text) {
    // "constant:fx,fy,fz" or "parabolic:fx,fy,fz"
    const auto colon = text.find(':');
    ForceSpec spec;
    spec.kind = text.substr(0, colon);
    if (spec.kind != "constant" && spec.kind != "parabolic")
        throw InputError("force must be constant:fx,fy,fz or parabolic:fx,fy,fz");
    if (colon != std::string::npos) {
        const std::string rest = text.substr(colon + 1);
        double v[3];
        int i = 0;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (i >= 3) throw InputError("force direction needs exactly 3 components");
            v[i++] = parse_double_strict(tok);
        }
        if (i != 3) throw InputError("force direction needs exactly 3 components");
        spec.direction = Vec3{v[0], v[1], v[2]};
    }
    return spec;
}

inline QuadratureSpec quad_spec_from_json(const json& j) {
    check_keys(j, {"base_panels", "refinement_levels", "nodes_per_panel", "theta_nodes", "error_check"},
               "quad");
    QuadratureSpec q;
    if (j.contains("base_panels")) q.base_panels = j["base_panels"].get<int>();
    if (j.contains("refinement_levels")) q.refinement_levels = j["refinement_levels"].get<int>();
    if (j.contains("nodes_per_panel")) q.nodes_per_panel = j["nodes_per_panel"].get<int>();
    if (j.contains("theta_nodes")) q.theta_nodes = j["theta_nodes"].get<int>();
    if (j.contains("error_check")) q.error_check = j["error_check"].get<bool>();
    q.validate();
    return q;
}

inline SweepConfig sweep_config_from_json(const json& j) {
    check_keys(j,
               {"epsilons", "geometry", "force", "quad", "s_points", "window", "L_form",
                "force_convention", "threads"},
               "sweep config");
    SweepConfig cfg;
    if (j.contains("epsilons")) {
        cfg.epsilons.clear();
        for (const auto& e : j["epsilons"]) cfg.epsilons.push_back(e.get<double>());
    }
    if (!j.contains("geometry")) throw InputError("sweep config needs 'geometry'");
    cfg.geometry = geometry_doc_from_json(j["geometry"]);
    if (j.contains("force")) {
        check_keys(j["force"], {"kind", "direction"}, "force");
        if (j["force"].contains("kind")) cfg.force.kind = j["force"]["kind"].get<std::string>();
        if (j["force"].contains("direction")) cfg.force.direction = get_vec3(j["force"], "direction", "force");
    }
    if (j.contains("quad")) cfg.quad = quad_spec_from_json(j["quad"]);
    if (j.contains("s_points")) cfg.s_points = j["s_points"].get<int>();
    if (j.contains("window")) cfg.window = j["window"].get<double>();
    if (j.contains("L_form")) {
        const std::string form = j["L_form"].get<std::string>();
        if (form == "asymptotic")
            cfg.l_form = LForm::Asymptotic;
        else if (form == "lemma")
            cfg.l_form = LForm::Lemma;
        else
            throw InputError("L_form must be 'asymptotic' or 'lemma'");
    }
    if (j.contains("force_convention")) {
        const std::string conv = j["force_convention"].get<std::string>();
        if (conv == "stretch")
            cfg.convention = ForceConvention::Stretch;
        else if (conv == "direct")
            cfg.convention = ForceConvention::Direct;
        else
            throw InputError("force_convention must be 'stretch' or 'direct'");
    }
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    cfg.validate();
    return cfg;
}

inline json sweep_config_to_json(const SweepConfig& cfg) {
    json j;
    j["epsilons"] = cfg.epsilons;
    j["geometry"] = geometry_doc_to_json(cfg.geometry);
    j["force"] = {{"kind", cfg.force.kind},
                  {"direction", {cfg.force.direction.x, cfg.force.direction.y, cfg.force.direction.z}}};
    j["quad"] = {{"base_panels", cfg.quad.base_panels},
                 {"refinement_levels", cfg.quad.refinement_levels},
                 {"nodes_per_panel", cfg.quad.nodes_per_panel},
                 {"theta_nodes", cfg.quad.theta_nodes},
                 {"error_check", cfg.quad.error_check}};
    j["s_points"] = cfg.s_points;
    j["window"] = cfg.window;
    j["L_form"] = cfg.l_form == LForm::Asymptotic ? "asymptotic" : "lemma";
    j["force_convention"] = cfg.convention == ForceConvention::Stretch ? "stretch" : "direct";
    j["threads"] = cfg.threads;
    return j;
}

inline json admissibility_to_json(const AdmissibilityReport& rep) {
    auto cond = [](const char* name, const ConditionResult& c) {
        return json{{"condition", name}, {"pass", c.pass}, {"detail", c.detail}};
    };
    json j;
    j["conditions"] = json::array({cond("smoothness", rep.smoothness),
                                   cond("spheroidal_endpoints", rep.spheroidal_endpoints),
                                   cond("nonvanishing", rep.nonvanishing),
                                   cond("derivative_bound", rep.derivative_bound)});
    j["constants"] = {{"delta_a", rep.delta_a}, {"c_a", rep.c_a},     {"a0", rep.a0},
                      {"bar_c_a", rep.bar_ca},  {"c_eta", rep.c_eta}, {"c_eta0", rep.c_eta0}};
    j["cap_mode"] = rep.cap_mode;
    j["pass"] = rep.all_pass();
    return j;
}

} // namespace sbt

#endif
