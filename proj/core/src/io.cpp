#include "sqavg/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sqavg {

using nlohmann::json;

namespace {

json intervals_json(const std::vector<Interval>& iv)
{
    json a = json::array();
    for (const auto& i : iv) a.push_back({i.lo, i.hi});
    return a;
}

std::vector<Interval> intervals_from(const json& a)
{
    std::vector<Interval> out;
    for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2) throw ConfigError("interval must be [lo, hi]");
        out.push_back({p[0].get<std::int64_t>(), p[1].get<std::int64_t>()});
    }
    return out;
}

json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad JSON: ") + e.what());
    }
}

}  // namespace

std::string step_function_to_json(const StepFunction& f)
{
    std::map<Rat, std::vector<Interval>> by_value;
    for (const auto& r : f.runs())
        if (r.value != 0) by_value[r.value].push_back({r.lo, r.hi});
    json pieces = json::array();
    for (const auto& [v, iv] : by_value) pieces.push_back({{"intervals", intervals_json(iv)}, {"value", to_string(v)}});
    json j{{"period", f.period()}, {"resolution", f.resolution()}, {"pieces", pieces}};
    return j.dump();
}

StepFunction step_function_from_json(const std::string& text)
{
    const json j = parse(text);
    try {
        const auto P = j.at("period").get<std::int64_t>();
        const auto R = j.value("resolution", std::int64_t{1});
        std::vector<std::pair<PeriodicIntSet, Rat>> pieces;
        for (const auto& p : j.at("pieces"))
            pieces.push_back({PeriodicIntSet::from_intervals(P, intervals_from(p.at("intervals")), R),
                              parse_rational(p.at("value").get<std::string>())});
        if (pieces.empty()) return StepFunction::from_runs(P, R, {});
        return StepFunction::from_pieces(pieces);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad step function: ") + e.what());
    } catch (const ContractError& e) {
        throw ConfigError(std::string("bad step function: ") + e.what());
    }
}

std::string periodic_set_to_json(const PeriodicIntSet& s)
{
    json j{{"period", s.period()}, {"resolution", s.resolution()}, {"intervals", intervals_json(s.intervals())}};
    return j.dump();
}

PeriodicIntSet periodic_set_from_json(const std::string& text)
{
    const json j = parse(text);
    try {
        return PeriodicIntSet::from_intervals(j.at("period").get<std::int64_t>(), intervals_from(j.at("intervals")),
                                              j.value("resolution", std::int64_t{1}));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad periodic set: ") + e.what());
    } catch (const ContractError& e) {
        throw ConfigError(std::string("bad periodic set: ") + e.what());
    }
}

std::string csv_escape(const std::string& cell)
{
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << csv_escape(cells[i]);
    }
    os_ << '\n';
}

void write_text_file(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + path);
        os << content;
        if (!os) throw ConfigError("cannot write " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw ConfigError("cannot rename onto " + path);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace sqavg
