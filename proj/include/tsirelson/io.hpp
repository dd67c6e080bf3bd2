#ifndef TSIRELSON_IO_HPP
#define TSIRELSON_IO_HPP

// JSON and CSV formats for behaviors, functionals, polytope models and
// certification results.
//
// Behavior / functional:
//   {"order": [["ab","ab'","a'b","a'b'"], ["++","+0","0+","00"]],
//    "values": [16 numbers, row-major over the two lists]}
//
// Polytope model:
//   {"header": {...}, "provenance": {"construction": "double", "alpha": 2},
//    "constraints": [{"name", "bound", "functional": <functional>}],
//    "points": [{"label", "values"}]}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "tsirelson/bell.hpp"
#include "tsirelson/pef.hpp"
#include "tsirelson/polytope.hpp"

namespace tsirelson::io {

using json = nlohmann::json;

inline constexpr const char* kToolName = "tsirelson";
inline constexpr const char* kToolVersion = "0.1.0";

inline json order_json()
{
    json settings = json::array();
    json outcomes = json::array();
    for (std::string_view s : kSettingNames)
        settings.push_back(std::string(s));
    for (std::string_view o : kOutcomeNames)
        outcomes.push_back(std::string(o));
    return json::array({settings, outcomes});
}

/// {"tool", "version", "config"}; attached to every file the CLI writes.
inline json header_json(const json& config)
{
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config", config}};
}

inline json vec16_to_json(const Vec16& v)
{
    return {{"order", order_json()}, {"values", v}};
}

inline json to_json(const Behavior& p) { return vec16_to_json(p.values()); }
inline json to_json(const BellFunctional& b) { return vec16_to_json(b.values()); }

/// Reads the "values" array; "order", when present, must be the canonical one.
inline Vec16 vec16_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("values"))
        throw InvalidArgument("expected an object with a \"values\" array");
    if (j.contains("order") && j.at("order") != order_json())
        throw InvalidArgument("unsupported cell order: " + j.at("order").dump());
    const json& values = j.at("values");
    if (!values.is_array() || values.size() != kCells)
        throw InvalidArgument("\"values\" must hold 16 numbers");
    Vec16 v{};
    for (std::size_t i = 0; i < kCells; ++i) {
        if (!values[i].is_number())
            throw InvalidArgument("\"values\" entry " + std::to_string(i) + " is not a number");
        v[i] = values[i].get<double>();
    }
    return v;
}

inline Behavior behavior_from_json(const json& j) { return Behavior(vec16_from_json(j)); }
inline BellFunctional functional_from_json(const json& j) { return BellFunctional(vec16_from_json(j)); }

inline json to_json(const TsirelsonConstraint& c)
{
    return {{"name", c.name()}, {"bound", c.bound()}, {"functional", to_json(c.functional())}};
}

inline TsirelsonConstraint constraint_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("bound") || !j.contains("functional"))
        throw InvalidArgument("constraint needs \"bound\" and \"functional\"");
    if (!j.at("bound").is_number())
        throw InvalidArgument("constraint bound is not a number");
    return {j.value("name", std::string("custom")), functional_from_json(j.at("functional")),
            j.at("bound").get<double>()};
}

inline json to_json(const Provenance& p)
{
    json j = {{"construction", to_string(p.kind)}};
    if (p.alpha)
        j["alpha"] = *p.alpha;
    return j;
}

inline Provenance provenance_from_json(const json& j)
{
    Provenance p;
    if (!j.is_object())
        return p;
    p.kind = construction_from_string(j.value("construction", std::string("custom")));
    if (j.contains("alpha")) {
        if (!j.at("alpha").is_number())
            throw InvalidArgument("provenance alpha is not a number");
        p.alpha = j.at("alpha").get<double>();
    }
    return p;
}

inline json to_json(const PolytopeModel& model, const json& header = json::object())
{
    json points = json::array();
    for (const LabeledPoint& pt : model.points)
        points.push_back({{"label", pt.label}, {"values", pt.behavior.values()}});
    json constraints = json::array();
    for (const TsirelsonConstraint& c : model.constraints)
        constraints.push_back(to_json(c));
    json j;
    if (!header.empty())
        j["header"] = header;
    j["order"] = order_json();
    j["provenance"] = to_json(model.provenance);
    j["constraints"] = std::move(constraints);
    j["points"] = std::move(points);
    return j;
}

/// Model file contents before any behavior validation, so that an audit can
/// report points that are not normalized instead of refusing the file.
struct RawModel
{
    struct Point
    {
        std::string label;
        Vec16 values{};
    };
    std::vector<Point> points;
    std::vector<TsirelsonConstraint> constraints;
    Provenance provenance;
};

inline RawModel raw_model_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("points") || !j.at("points").is_array())
        throw InvalidArgument("model needs a \"points\" array");
    if (j.contains("order") && j.at("order") != order_json())
        throw InvalidArgument("unsupported cell order: " + j.at("order").dump());
    RawModel raw;
    if (j.contains("provenance"))
        raw.provenance = provenance_from_json(j.at("provenance"));
    for (const json& c : j.value("constraints", json::array()))
        raw.constraints.push_back(constraint_from_json(c));
    std::size_t n = 0;
    for (const json& p : j.at("points")) {
        RawModel::Point pt;
        pt.label = p.value("label", "P" + std::to_string(n));
        pt.values = vec16_from_json(p);
        raw.points.push_back(std::move(pt));
        ++n;
    }
    return raw;
}

/// Validates every point as a behavior. Points are kept as listed, duplicates
/// included; extremality checking is what flags those.
inline PolytopeModel model_from_raw(const RawModel& raw)
{
    PolytopeModel model;
    model.constraints = raw.constraints;
    model.provenance = raw.provenance;
    for (const RawModel::Point& pt : raw.points) {
        try {
            model.points.push_back({pt.label, Behavior(pt.values)});
        } catch (const InvalidBehavior& e) {
            throw InvalidBehavior("point " + pt.label + ": " + e.what());
        }
    }
    return model;
}

inline PolytopeModel model_from_json(const json& j) { return model_from_raw(raw_model_from_json(j)); }

// ---------------------------------------------------------------------------
// Files

inline json parse_json(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(origin + ": " + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::filesystem::path& path)
{
    return parse_json(read_file(path), path.string());
}

/// Writes to a sibling temporary file and renames it over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// One line per (alpha, beta) point. Columns: [alpha,] beta,
/// expected_log_e, bits_log2, solver_status. Header lines start with '#'.
struct SweepCsvRow
{
    std::optional<double> alpha;
    BetaTracePoint point;
};

inline std::string sweep_csv(const std::vector<SweepCsvRow>& rows, const json& header)
{
    const bool with_alpha = !rows.empty() && rows.front().alpha.has_value();
    std::ostringstream out;
    out << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
    out << "# config: " << header.dump() << '\n';
    if (with_alpha)
        out << "alpha,";
    out << "beta,expected_log_e,bits_log2,solver_status\n";
    for (const SweepCsvRow& r : rows) {
        if (with_alpha)
            out << format_number(r.alpha.value_or(0.0)) << ',';
        std::string status = r.point.status;
        for (char& c : status)
            if (c == ',' || c == '\n')
                c = ';';
        out << format_number(r.point.beta) << ',' << format_number(r.point.expected_log) << ','
            << format_number(r.point.bits) << ',' << status << '\n';
    }
    return out.str();
}

inline json to_json(const CertificationReport& r, const CertificationConfig& cfg)
{
    json j = {{"epsilon", cfg.epsilon},
              {"trials", cfg.trials},
              {"found", r.found},
              {"failures", r.failures},
              {"grid_size", r.trace.size()}};
    if (r.found) {
        j["best"] = {{"beta", r.beta}, {"expected_log_e", r.expected_log}, {"bits_log2", r.bits}};
    } else {
        j["best"] = nullptr;
    }
    return j;
}

} // namespace tsirelson::io

#endif
