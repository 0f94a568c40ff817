#include "mbcascade/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mbcascade {

using nlohmann::json;

namespace {

Vec3 vec3(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw ScenarioFormatError(std::string(what) + ": expected [x, y, z]");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_array(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

ScalarField make_function(const json& fj) {
    const std::string type = fj.at("type").get<std::string>();
    ScalarField f;
    if (type == "height") {
        const Vec3 a = vec3(fj.at("direction"), "function.direction");
        f.value = [a](const Vec3& x) { return a.dot(x); };
        f.ambient_gradient = [a](const Vec3&) { return a; };
    } else if (type == "height_squared") {
        const Vec3 a = vec3(fj.at("direction"), "function.direction");
        f.value = [a](const Vec3& x) {
            const double h = a.dot(x);
            return h * h;
        };
        f.ambient_gradient = [a](const Vec3& x) -> Vec3 { return 2.0 * a.dot(x) * a; };
    } else if (type == "skew_height_squared") {
        // z^2 + kappa x y z^6
        const double k = fj.at("kappa").get<double>();
        f.value = [k](const Vec3& x) {
            const double z2 = x[2] * x[2];
            return z2 + k * x[0] * x[1] * z2 * z2 * z2;
        };
        f.ambient_gradient = [k](const Vec3& x) -> Vec3 {
            const double z = x[2], z5 = z * z * z * z * z, z6 = z5 * z;
            return Vec3(k * x[1] * z6, k * x[0] * z6, 2.0 * z + 6.0 * k * x[0] * x[1] * z5);
        };
    } else {
        throw ScenarioFormatError("unknown function type '" + type + "'");
    }
    return f;
}

SurfaceModel make_surface(const json& sj) {
    const std::string type = sj.at("type").get<std::string>();
    if (type == "sphere")
        return make_sphere(sj.at("radius").get<double>(),
                           sj.contains("center") ? vec3(sj["center"], "surface.center") : Vec3::Zero());
    if (type == "torus")
        return make_torus(sj.at("major_radius").get<double>(), sj.at("minor_radius").get<double>(),
                          vec3(sj.at("axis"), "surface.axis"));
    throw ScenarioFormatError("unknown surface type '" + type + "'");
}

json settings_json(const ScenarioConfig& c) {
    json eps = {{"start", c.epsilon.start},
                {"max_halvings", c.epsilon.max_halvings},
                {"schedule_points", c.epsilon.schedule_points},
                {"schedule_decades", c.epsilon.schedule_decades}};
    eps["value"] = c.epsilon.value > 0.0 ? json(c.epsilon.value) : json(nullptr);
    if (!c.epsilon.schedule.empty()) eps["schedule"] = c.epsilon.schedule;
    const CascadeSettings& k = c.cascade;
    json tol = {{"verify", c.verify_tol},
                {"rtol", k.ode.rtol},
                {"atol", k.ode.atol},
                {"max_step", k.ode.max_step},
                {"bisection", k.bisection_tol},
                {"samples", k.samples},
                {"max_doublings", k.max_doublings},
                {"delta", k.delta},
                {"resolution", k.resolution},
                {"circle_capture", k.capture.circle_eta},
                {"point_capture", k.capture.point_eta},
                {"sink_radius", k.capture.sink_radius},
                {"landing", k.capture.landing_tol},
                {"smallness_samples", c.smallness.samples},
                {"orthogonality", c.smallness.orthogonality_tol},
                {"model_fit", c.smallness.model_tol}};
    return json{{"epsilon", eps},
                {"tolerances", tol},
                {"seed", c.smallness.seed},
                {"output", {{"directory", c.output_dir}}}};
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioFormatError(std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioConfig c;
    try {
        if (!root.contains("format_version")) throw ScenarioFormatError("missing format_version");
        c.format_version = root["format_version"].get<int>();
        if (c.format_version != kScenarioFormatVersion)
            throw ScenarioFormatError("unsupported format_version " + std::to_string(c.format_version));

        MorseBottScenario& sc = c.scenario;
        sc.name = root.value("name", std::string("unnamed"));
        sc.surface = make_surface(root.at("surface"));
        sc.f = make_function(root.at("function"));
        read(root, "capture_radius", sc.capture_radius);

        double inner = 0.1, outer = 0.2;
        if (root.contains("tubes")) {
            read(root["tubes"], "inner", inner);
            read(root["tubes"], "outer", outer);
        }
        for (const json& s : root.at("submanifolds")) {
            CriticalSubmanifold C;
            C.name = s.at("name").get<std::string>();
            const std::string kind = s.at("kind").get<std::string>();
            C.bott_index = s.at("index").get<int>();
            if (kind == "point") {
                C.kind = SubmanifoldKind::Point;
                C.point = vec3(s.at("location"), "submanifold.location");
                C.aux.function = TrigPolynomial{s.value("aux_constant", 1.0), {}, {}};
            } else if (kind == "circle") {
                C.kind = SubmanifoldKind::Circle;
                C.circle.center = vec3(s.at("center"), "submanifold.center");
                C.circle.radius = s.at("radius").get<double>();
                C.circle.e1 = vec3(s.at("e1"), "submanifold.e1").normalized();
                C.circle.e2 = vec3(s.at("e2"), "submanifold.e2").normalized();
                const json& a = s.at("aux");
                C.aux.function.constant = a.value("constant", 1.0);
                read(a, "cos", C.aux.function.cos_coeffs);
                read(a, "sin", C.aux.function.sin_coeffs);
            } else {
                throw ScenarioFormatError("unknown submanifold kind '" + kind + "'");
            }
            read(s, "labels", C.labels);
            read(s, "orientation_tags", C.orientation_tags);
            for (int t : C.orientation_tags)
                if (t != 1 && t != -1) throw ScenarioFormatError("orientation tags must be +1 or -1");
            TubularPair T{static_cast<int>(sc.submanifolds.size()), inner, outer};
            if (s.contains("tube")) {
                read(s["tube"], "inner", T.inner_radius);
                read(s["tube"], "outer", T.outer_radius);
            }
            c.tubes.push_back(T);
            sc.submanifolds.push_back(std::move(C));
        }
        finalize_scenario(sc);

        if (root.contains("epsilon")) {
            const json& e = root["epsilon"];
            read(e, "value", c.epsilon.value);
            read(e, "start", c.epsilon.start);
            read(e, "max_halvings", c.epsilon.max_halvings);
            read(e, "schedule_points", c.epsilon.schedule_points);
            read(e, "schedule_decades", c.epsilon.schedule_decades);
            read(e, "schedule", c.epsilon.schedule);
        }
        if (root.contains("tolerances")) {
            const json& t = root["tolerances"];
            CascadeSettings& k = c.cascade;
            read(t, "verify", c.verify_tol);
            read(t, "rtol", k.ode.rtol);
            read(t, "atol", k.ode.atol);
            read(t, "max_step", k.ode.max_step);
            read(t, "bisection", k.bisection_tol);
            read(t, "samples", k.samples);
            read(t, "max_doublings", k.max_doublings);
            read(t, "delta", k.delta);
            read(t, "resolution", k.resolution);
            read(t, "circle_capture", k.capture.circle_eta);
            read(t, "point_capture", k.capture.point_eta);
            read(t, "sink_radius", k.capture.sink_radius);
            read(t, "landing", k.capture.landing_tol);
            read(t, "smallness_samples", c.smallness.samples);
            read(t, "orthogonality", c.smallness.orthogonality_tol);
            read(t, "model_fit", c.smallness.model_tol);
        }
        read(root, "seed", c.smallness.seed);
        if (root.contains("output")) read(root["output"], "directory", c.output_dir);
    } catch (const json::exception& e) {
        throw ScenarioFormatError(std::string("scenario field error: ") + e.what());
    }
    // geometric part kept verbatim, settings regenerated on output
    json geo = root;
    for (const char* k : {"epsilon", "tolerances", "seed", "output"}) geo.erase(k);
    c.source_text = geo.dump();
    return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json j = json::parse(c.source_text);
    j.update(settings_json(c));
    return j.dump(2);
}

ScenarioConfig load_scenario(const std::string& path) {
    for (const std::string& n : catalog_names())
        if (n == path) return catalog_scenario(n);
    std::ifstream in(path);
    if (!in) throw ScenarioFormatError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::vector<std::string> catalog_names() {
    return {"sphere-z", "sphere-z2", "sphere-skew", "flat-torus", "upright-torus"};
}

namespace {

json point(const std::string& name, const Vec3& x, int index) {
    return json{{"name", name}, {"kind", "point"}, {"location", to_array(x)}, {"index", index}};
}

json circle(const std::string& name, const Vec3& center, double radius, int index,
            const std::vector<std::string>& labels) {
    return json{{"name", name},
                {"kind", "circle"},
                {"center", to_array(center)},
                {"radius", radius},
                {"e1", json::array({1, 0, 0})},
                {"e2", json::array({0, 1, 0})},
                {"index", index},
                {"aux", {{"constant", 1.0}, {"cos", json::array({0.5})}}},
                {"labels", labels}};
}

}  // namespace

ScenarioConfig catalog_scenario(const std::string& name) {
    json j;
    j["format_version"] = kScenarioFormatVersion;
    j["name"] = name;
    j["tubes"] = {{"inner", 0.1}, {"outer", 0.2}};
    const json sphere = {{"type", "sphere"}, {"radius", 1.0}};
    const json zdir = json::array({0, 0, 1});
    if (name == "sphere-z") {
        j["surface"] = sphere;
        j["function"] = {{"type", "height"}, {"direction", zdir}};
        j["submanifolds"] = {point("N", {0, 0, 1}, 2), point("S", {0, 0, -1}, 0)};
    } else if (name == "sphere-z2" || name == "sphere-skew") {
        j["surface"] = sphere;
        if (name == "sphere-z2")
            j["function"] = {{"type", "height_squared"}, {"direction", zdir}};
        else
            j["function"] = {{"type", "skew_height_squared"}, {"kappa", 0.5}};
        j["submanifolds"] = {point("N", {0, 0, 1}, 2), point("S", {0, 0, -1}, 2),
                             circle("equator", {0, 0, 0}, 1.0, 0, {"b", "a"})};
    } else if (name == "flat-torus") {
        j["surface"] = {{"type", "torus"}, {"major_radius", 2.0}, {"minor_radius", 1.0}, {"axis", zdir}};
        j["function"] = {{"type", "height"}, {"direction", zdir}};
        j["submanifolds"] = {circle("top", {0, 0, 1}, 2.0, 1, {"d", "c"}),
                             circle("bottom", {0, 0, -1}, 2.0, 0, {"b", "a"})};
    } else if (name == "upright-torus") {
        j["surface"] = {{"type", "torus"}, {"major_radius", 2.0}, {"minor_radius", 1.0},
                        {"axis", json::array({1, 0, 0})}};
        j["function"] = {{"type", "height"}, {"direction", zdir}};
        j["submanifolds"] = {point("top", {0, 0, 3}, 2), point("upper", {0, 0, 1}, 1),
                             point("lower", {0, 0, -1}, 1), point("bottom", {0, 0, -3}, 0)};
    } else {
        throw ScenarioFormatError("no catalog scenario named '" + name + "'");
    }
    return parse_scenario(j.dump());
}

}  // namespace mbcascade
