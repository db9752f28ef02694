#include "commands.hpp"

#include "sqavg/io.hpp"
#include "sqavg/parallel.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace sqavg::cli {

namespace {

json load_scenario(const std::string& path)
{
    if (path.empty()) return json::object();
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("scenario " + path + ": " + e.what());
    }
}

}  // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Exact experiments on averages along squares"};
    app.require_subcommand(1);
    std::string scenario_path;
    RunFlags flags;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string q_flag, gamma_flag;

    app.add_option("--scenario", scenario_path, "scenario JSON file");
    app.add_option("--out", flags.out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_flag("--assert-paper-bounds", flags.assert_bounds, "treat reported large-scale bounds as assertions");
    auto* seed_opt = app.add_option("--seed", seed, "overrides the scenario seed");

    std::vector<CLI::App*> subs;
    for (const auto& c : commands()) {
        auto* s = app.add_subcommand(c.name, c.help);
        s->fallthrough();
        if (std::string(c.name) == "residues") {
            s->add_option("--q", q_flag, "one modulus as a comma separated prime list, e.g. 3,5");
            s->add_option("--gamma", gamma_flag, "window constant 2^-c, e.g. 1/2");
        }
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        set_worker_threads(threads);
        flags.has_seed = seed_opt->count() > 0;
        flags.seed = seed;
        json sc = load_scenario(scenario_path);
        check_schema(sc);
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            const Command& c = commands()[i];
            if (!q_flag.empty()) {
                json primes = json::array();
                std::size_t pos = 0;
                while (pos <= q_flag.size()) {
                    const auto comma = q_flag.find(',', pos);
                    const std::string tok = q_flag.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                    primes.push_back(to_int64(parse_bigint(tok)));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
                sc["moduli"] = json::array({primes});
            }
            if (!gamma_flag.empty()) sc["gamma"] = gamma_flag;
            Report report(c.name);
            c.run(sc, flags, report);
            return report.write(flags);
        }
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ScaleError& e) {
        std::cerr << "scale cap: " << e.what() << "\n";
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "assertion failed: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace sqavg::cli
