#include "commands.hpp"

#include "sqavg/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args)
{
    args.insert(args.begin(), "sqavg");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return sqavg::cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("sqavg_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Cli, ResiduesWritesArtifacts)
{
    const auto d = scratch("res");
    EXPECT_EQ(run({"--out", d.string(), "residues", "--q", "3,5", "--gamma", "1/2"}), 0);
    EXPECT_TRUE(fs::exists(d / "residues.json"));
    EXPECT_TRUE(fs::exists(d / "residues.csv"));
    EXPECT_TRUE(fs::exists(d / "residues.txt"));
    fs::remove_all(d);
}

TEST(Cli, ExitCodes)
{
    const auto d = scratch("codes");
    const auto bad_schema = (d / "bad.json").string();
    sqavg::write_text_file(bad_schema, R"({"schema_version": 99})");
    EXPECT_EQ(run({"--out", d.string(), "--scenario", bad_schema, "residues"}), 2);
    EXPECT_EQ(run({"--out", d.string(), "--scenario", (d / "missing.json").string(), "residues"}), 2);
    EXPECT_EQ(run({"--out", d.string(), "residues", "--q", "9"}), 2);                  // not square-free
    EXPECT_EQ(run({"--out", d.string(), "nonsense"}), 2);
    EXPECT_EQ(run({"--out", d.string(), "residues", "--q", "3,5,7,11,13,17,19,23,29,31"}), 3);
    const auto fail = (d / "fail.json").string();
    sqavg::write_text_file(fail, R"({"schema_version": 1, "M": 2, "K": 1, "Gamma": "11/10"})");
    EXPECT_EQ(run({"--out", d.string(), "--scenario", fail, "family-verify"}), 1);
    fs::remove_all(d);
}

TEST(Cli, RunsAreByteIdentical)
{
    const auto a = scratch("rep_a"), b = scratch("rep_b");
    ASSERT_EQ(run({"--out", a.string(), "--seed", "7", "family-verify"}), 0);
    ASSERT_EQ(run({"--out", b.string(), "--seed", "7", "family-verify"}), 0);
    for (const char* f : {"family-verify.json", "family-verify.csv", "family-verify.txt"})
        EXPECT_EQ(sqavg::read_text_file((a / f).string()), sqavg::read_text_file((b / f).string())) << f;
    fs::remove_all(a);
    fs::remove_all(b);
}
