#pragma once

#include "sqavg/periodic_set.hpp"
#include "sqavg/step_function.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace sqavg {

// {"period", "resolution", "pieces": [{"intervals": [[lo, hi], ...], "value": "num/den"}]}
// Intervals are cell ranges of one period; zero pieces are omitted.
std::string step_function_to_json(const StepFunction& f);
StepFunction step_function_from_json(const std::string& text);   // ConfigError on bad input

// {"period", "resolution", "intervals": [[lo, hi], ...]}
std::string periodic_set_to_json(const PeriodicIntSet& s);
PeriodicIntSet periodic_set_from_json(const std::string& text);

// RFC 4180 quoting, "\n" line ends.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& os_;
};

std::string csv_escape(const std::string& cell);

// Writes through a temporary file and renames.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);   // ConfigError if missing

}  // namespace sqavg
