#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracvar/catalog.hpp"
#include "fracvar/expression.hpp"
#include "fracvar/fields.hpp"
#include "fracvar/solver.hpp"
#include "fracvar/variational.hpp"

namespace fracvar {

/// 17-significant-digit decimal formatting; round-trips any double and keeps
/// file output byte-stable across runs. Signed zero prints as "0".
inline std::string format_g17(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::string field_to_csv(const Field2D& u) {
    std::string out = "x,y,value\n";
    const Grid2D& g = u.grid();
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            out += format_g17(g.x(i));
            out += ',';
            out += format_g17(g.y(j));
            out += ',';
            out += format_g17(u(i, j));
            out += '\n';
        }
    return out;
}

inline std::string field_to_csv(const Field1D& f) {
    std::string out = "x,value\n";
    for (int i = 0; i < f.n(); ++i) {
        out += format_g17(f.x(i));
        out += ',';
        out += format_g17(f[i]);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json field_to_json(const Field2D& u) {
    const Grid2D& g = u.grid();
    nlohmann::ordered_json j;
    j["grid"] = {{"a", g.a()}, {"b", g.b()}, {"c", g.c()}, {"d", g.d()},
                 {"nx", g.nx()}, {"ny", g.ny()}};
    j["values"] = std::vector<double>(u.values().begin(), u.values().end());
    return j;
}

inline Field2D field_from_json(const nlohmann::json& j) {
    const auto& g = j.at("grid");
    Grid2D grid(g.at("a").get<double>(), g.at("b").get<double>(), g.at("c").get<double>(),
                g.at("d").get<double>(), g.at("nx").get<int>(), g.at("ny").get<int>());
    return Field2D(grid, j.at("values").get<std::vector<double>>());
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Writes a 2D field as CSV, or JSON when the path ends in ".json".
inline void write_field(const Field2D& u, const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        write_text_file(path, field_to_json(u).dump(2) + "\n");
    else
        write_text_file(path, field_to_csv(u));
}

inline nlohmann::ordered_json report_to_json(const SolveReport& r, const std::string& field_path) {
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    j["objective"] = r.objective;
    j["lambda0"] = r.multipliers.lambda0;
    j["lambda"] = r.multipliers.lambda;
    j["constraint_violation"] = r.constraint_violation;
    j["el_residual_max"] = r.el_residual_max;
    if (std::isnan(r.nat_bc_residual_max))
        j["nat_bc_residual_max"] = nullptr;
    else
        j["nat_bc_residual_max"] = r.nat_bc_residual_max;
    j["iterations"] = r.iterations;
    j["field"] = field_path;
    return j;
}

/// Problem-spec file: {"f": <integrand name>, "g": <integrand name>,
/// "K": number, "psi": number | expression string (optional)}.
/// Unknown keys are rejected.
inline IsoperimetricProblem problem_from_spec_json(const nlohmann::json& j, const Grid2D& grid,
                                                   FractionalOrder order) {
    for (const auto& [key, _] : j.items())
        if (key != "f" && key != "g" && key != "K" && key != "psi")
            throw std::invalid_argument("problem spec: unknown key '" + key + "'");
    if (!j.contains("f") || !j.contains("g") || !j.contains("K"))
        throw std::invalid_argument("problem spec: keys f, g, K are required");

    IsoperimetricProblem p{grid, order, integrand_by_name(j.at("f").get<std::string>()),
                           integrand_by_name(j.at("g").get<std::string>()),
                           j.at("K").get<double>(), std::nullopt};
    if (j.contains("psi")) {
        if (j.at("psi").is_number()) {
            const double v = j.at("psi").get<double>();
            p.psi = BoundaryTrace::from_function([v](double, double) { return v; }, grid);
        } else if (j.at("psi").is_string()) {
            auto e = std::make_shared<Expression>(Expression::parse(j.at("psi").get<std::string>()));
            p.psi = BoundaryTrace::from_function(
                [e](double x, double y) { return e->eval(x, y); }, grid);
        } else {
            throw std::invalid_argument("problem spec: psi must be a number or expression string");
        }
    }
    p.validate();
    return p;
}

inline IsoperimetricProblem problem_from_spec_file(const std::string& path, const Grid2D& grid,
                                                   FractionalOrder order) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open problem spec: " + path);
    nlohmann::json j;
    in >> j;
    return problem_from_spec_json(j, grid, order);
}

} // namespace fracvar
