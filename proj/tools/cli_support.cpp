#include "cli_support.hpp"

#include "sqavg/io.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace sqavg::cli {

void Report::check(const std::string& name, bool pass, const std::string& detail)
{
    checks_.push_back({name, pass, detail});
}

void Report::bound(const std::string& name, bool holds, const std::string& detail)
{
    bounds_.push_back({name, holds, detail});
}

bool Report::passed(bool assert_bounds) const
{
    for (const auto& c : checks_)
        if (!c.pass) return false;
    if (assert_bounds)
        for (const auto& b : bounds_)
            if (!b.pass) return false;
    return true;
}

namespace {

json checks_json(const std::vector<Check>& cs)
{
    json a = json::array();
    for (const auto& c : cs) a.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return a;
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows)
{
    std::ostringstream os;
    CsvWriter w(os);
    w.row(header);
    for (const auto& r : rows) w.row(r);
    return os.str();
}

}  // namespace

int Report::write(const RunFlags& flags) const
{
    const bool ok = passed(flags.assert_bounds);
    std::filesystem::create_directories(flags.out_dir);
    const std::string base = flags.out_dir + "/" + command_;

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command_;
    doc["config"] = config;
    doc["results"] = results;
    doc["checks"] = checks_json(checks_);
    doc["bounds"] = checks_json(bounds_);
    doc["bounds_asserted"] = flags.assert_bounds;
    doc["pass"] = ok;
    write_text_file(base + ".json", doc.dump(2) + "\n");
    write_text_file(base + ".csv", csv_text(csv_header, csv_rows));
    for (const auto& [name, t] : extra_csv) write_text_file(flags.out_dir + "/" + name + ".csv", csv_text(t.first, t.second));

    std::ostringstream txt;
    txt << command_ << "\n" << summary.str();
    std::size_t failed = 0, bfailed = 0;
    for (const auto& c : checks_) {
        if (!c.pass) {
            ++failed;
            txt << "FAILED " << c.name << ": " << c.detail << "\n";
        }
    }
    for (const auto& b : bounds_) {
        if (!b.pass) {
            ++bfailed;
            txt << (flags.assert_bounds ? "FAILED " : "not met ") << b.name << ": " << b.detail << "\n";
        }
    }
    txt << "checks: " << (checks_.size() - failed) << "/" << checks_.size() << " pass; bounds: "
        << (bounds_.size() - bfailed) << "/" << bounds_.size() << " hold"
        << (flags.assert_bounds ? " (asserted)" : " (reported)") << "\n";
    txt << (ok ? "PASS" : "FAIL") << "\n";
    write_text_file(base + ".txt", txt.str());
    std::cout << txt.str();
    return ok ? 0 : 1;
}

Rat get_rat(const json& j, const char* key, const Rat& def)
{
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rat(big(v.get<std::int64_t>()));
    throw ConfigError(std::string("'") + key + "' must be an integer or a \"num/den\" string");
}

std::int64_t get_int(const json& j, const char* key, std::int64_t def)
{
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) return to_int64(parse_bigint(v.get<std::string>()));
    throw ConfigError(std::string("'") + key + "' must be an integer");
}

bool get_bool(const json& j, const char* key, bool def)
{
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

GammaParam get_gamma(const json& j, const char* key, const std::string& def)
{
    if (!j.contains(key)) return GammaParam::from_rational(parse_rational(def));
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string such as \"1/4\"");
    return GammaParam::from_rational(parse_rational(v.get<std::string>()));
}

SquareFreeModulus modulus_of(const json& v)
{
    if (v.is_number_integer()) {
        const auto q = v.get<std::int64_t>();
        if (q < 3) throw ConfigError("modulus must be an odd square-free integer >= 3");
        return SquareFreeModulus::from_value(static_cast<std::uint64_t>(q));
    }
    if (v.is_array()) {
        std::vector<std::uint64_t> ps;
        for (const auto& p : v) {
            if (!p.is_number_integer() || p.get<std::int64_t>() < 3) throw ConfigError("primes must be odd integers >= 3");
            ps.push_back(p.get<std::uint64_t>());
        }
        return SquareFreeModulus::from_primes(ps);
    }
    throw ConfigError("a modulus is an integer or a list of primes");
}

std::vector<SquareFreeModulus> get_moduli(const json& j, const char* key, const json& def)
{
    const json& v = j.contains(key) ? j.at(key) : def;
    if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be a list of moduli");
    std::vector<SquareFreeModulus> out;
    for (const auto& m : v) out.push_back(modulus_of(m));
    return out;
}

std::vector<std::int64_t> get_int_list(const json& j, const char* key, std::vector<std::int64_t> def)
{
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be a list of integers");
    std::vector<std::int64_t> out;
    for (const auto& x : v) {
        if (!x.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be a list of integers");
        out.push_back(x.get<std::int64_t>());
    }
    return out;
}

std::string primes_label(const SquareFreeModulus& q)
{
    std::string s;
    for (auto p : q.primes()) {
        if (!s.empty()) s += '*';
        s += std::to_string(p);
    }
    return s;
}

std::string approx(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void check_schema(const json& scenario)
{
    if (!scenario.is_object()) throw ConfigError("scenario must be a JSON object");
    if (scenario.contains("schema_version")) {
        const json& v = scenario.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
            throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
}

}  // namespace sqavg::cli
