#include "sqavg/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace sqavg;

TEST(Io, StepFunctionRoundTrip)
{
    const auto f = StepFunction::from_runs(6, 4, {{0, 3, Rat(1, 3)}, {5, 9, Rat(-2)}, {20, 24, Rat(7, 5)}});
    const auto text = step_function_to_json(f);
    EXPECT_EQ(step_function_from_json(text), f);
    EXPECT_EQ(step_function_to_json(step_function_from_json(text)), text);
}

TEST(Io, PeriodicSetRoundTrip)
{
    const auto s = PeriodicIntSet::from_intervals(10, {{1, 3}, {7, 12}}, 2);
    EXPECT_EQ(periodic_set_from_json(periodic_set_to_json(s)), s);
    EXPECT_EQ(periodic_set_from_json(periodic_set_to_json(PeriodicIntSet::empty_set())), PeriodicIntSet::empty_set());
}

TEST(Io, RejectsMalformedInput)
{
    EXPECT_THROW(step_function_from_json("{"), ConfigError);
    EXPECT_THROW(step_function_from_json(R"({"period": 0, "resolution": 1, "pieces": []})"), ConfigError);
    EXPECT_THROW(periodic_set_from_json(R"({"period": 2})"), ConfigError);
}

TEST(Io, CsvQuoting)
{
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"x", "1/2"});
    w.row({"y,z", ""});
    EXPECT_EQ(os.str(), "x,1/2\n\"y,z\",\n");
}

TEST(Io, TextFiles)
{
    const auto dir = std::filesystem::temp_directory_path() / "sqavg_io_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "a.txt").string();
    write_text_file(path, "hello\n");
    EXPECT_EQ(read_text_file(path), "hello\n");
    write_text_file(path, "again");
    EXPECT_EQ(read_text_file(path), "again");
    EXPECT_THROW(read_text_file((dir / "missing.txt").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
