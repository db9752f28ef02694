#pragma once

#include "sqavg/modulus.hpp"
#include "sqavg/periodic_set.hpp"
#include "sqavg/rational.hpp"

#include "json.hpp"

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace sqavg::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;   // witness or margin
};

struct RunFlags {
    std::string out_dir = "out";
    bool assert_bounds = false;
    bool has_seed = false;
    std::uint64_t seed = 1;
};

// Everything a subcommand emits. Files: <out>/<command>.json, .csv, .txt.
class Report {
public:
    explicit Report(std::string command) : command_(std::move(command)) {}

    json config = json::object();
    json results = json::object();
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    // extra CSV files: name -> (header, rows)
    std::vector<std::pair<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>>>
        extra_csv;
    std::ostringstream summary;

    void check(const std::string& name, bool pass, const std::string& detail = {});
    void bound(const std::string& name, bool holds, const std::string& detail = {});

    bool passed(bool assert_bounds) const;
    int write(const RunFlags& flags) const;   // returns the exit code

private:
    std::string command_;
    std::vector<Check> checks_;
    std::vector<Check> bounds_;
};

// Scenario access with defaults; type errors become ConfigError.
Rat get_rat(const json& j, const char* key, const Rat& def);
std::int64_t get_int(const json& j, const char* key, std::int64_t def);
bool get_bool(const json& j, const char* key, bool def);
GammaParam get_gamma(const json& j, const char* key, const std::string& def);
// A modulus is an integer q or a list of primes.
SquareFreeModulus modulus_of(const json& v);
std::vector<SquareFreeModulus> get_moduli(const json& j, const char* key, const json& def);
std::vector<std::int64_t> get_int_list(const json& j, const char* key, std::vector<std::int64_t> def);

std::string primes_label(const SquareFreeModulus& q);
std::string approx(double v);   // fixed 12 significant digits, for labeled approximations
std::string yes_no(bool b);

void check_schema(const json& scenario);   // schema_version must be 1 when present

}  // namespace sqavg::cli
