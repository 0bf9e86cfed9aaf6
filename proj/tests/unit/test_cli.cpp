#include "fgpc/cli/config.hpp"
#include "fgpc/cli/runner.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using fgpc::cli::Violation;
using nlohmann::json;

namespace {

const fs::path config_dir = FGPC_CONFIG_DIR;

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "fgpc_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_json(const fs::path& p, const json& j)
{
    std::ofstream(p) << j.dump(2);
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(FGPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool mentions(const std::vector<Violation>& v, const std::string& text)
{
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
        return x.message.find(text) != std::string::npos || x.path.find(text) != std::string::npos;
    });
}

// Small forced problem exercising every per-solution analysis.
json small_config()
{
    json c = read_json(config_dir / "duffing_fig3.config");
    c["discretization"] = {{"H", 3}, {"N", 4}};
    c["analyses"] = {{"branch", 0},
                     {"coefficient_grid", true},
                     {"moments", {{"points", 33}}},
                     {"summary", {{"samples", 2000}, {"points", 33}}},
                     {"marginal", {{"time", 2.0}, {"samples", 2000}}},
                     {"mc_oracle", {{"samples", 50}, {"points", 33}}},
                     {"phase_portrait", {{"samples", 500}, {"points", 65}}}};
    return c;
}

std::set<std::string> listing(const fs::path& dir)
{
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        out.insert(e.path().filename().string());
    return out;
}

} // namespace

TEST_CASE("shipped configs validate")
{
    for (const char* name : {"duffing_fig3", "duffing_fig4", "duffing_fig5", "duffing_fig7", "duffing_backbone",
                             "vanderpol_selfexcited"}) {
        const fs::path p = config_dir / (std::string(name) + ".config");
        INFO(name);
        CHECK(fgpc::cli::validate_config(fgpc::cli::load_config_document(p)).empty());
        CHECK(cli("validate " + p.string()) == 0);
    }
}

TEST_CASE("validation reports rule violations")
{
    json c = read_json(config_dir / "duffing_fig3.config");
    c["discretization"]["N_t"] = 10;
    const auto aliasing = fgpc::cli::validate_config(c);
    CHECK(mentions(aliasing, "anti-aliasing"));

    c = read_json(config_dir / "duffing_fig3.config");
    c["deflation"]["shift"] = -1.0;
    const auto shift = fgpc::cli::validate_config(c);
    REQUIRE(shift.size() == 1);
    CHECK(shift[0].message == "DeflationConfig requires alpha_D > 0");
    CHECK(shift[0].path == "/deflation/shift");

    c = read_json(config_dir / "duffing_fig3.config");
    c["solver"]["tolerence"] = 1e-8;
    CHECK(mentions(fgpc::cli::validate_config(c), "/solver/tolerence"));

    c = read_json(config_dir / "duffing_fig3.config");
    c["system"]["name"] = "pendulum";
    c["distribution"]["family"] = "gamma";
    CHECK(fgpc::cli::validate_config(c).size() >= 2);
    CHECK_THROWS_AS(fgpc::cli::parse_config(c), fgpc::cli::ConfigError);

    const fs::path p = scratch("aliasing.config");
    c = read_json(config_dir / "duffing_fig3.config");
    c["discretization"]["N_t"] = 10;
    write_json(p, c);
    CHECK(cli("validate " + p.string()) == 1);
}

TEST_CASE("malformed config leaves no artifacts")
{
    const fs::path cfg = scratch("broken.config");
    std::ofstream(cfg) << "{ \"system\": { \"name\": \"duffing\", ";
    const fs::path out = scratch("broken_out");
    CHECK(cli("run " + cfg.string() + " --output-dir " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(out.string() + ".partial"));
    CHECK(cli("validate " + cfg.string()) == 1);
    CHECK(cli("run") == 1);
}

TEST_CASE("backbone config writes branch tables with folds")
{
    const fs::path out = scratch("backbone");
    REQUIRE(cli("run " + (config_dir / "duffing_backbone.config").string() + " --output-dir " + out.string()) == 0);
    const json manifest = read_json(out / "manifest.json");
    CHECK(manifest["artifacts"] == json({"branch_0.csv", "branch_1.csv", "branch_2.csv"}));
    for (const std::string name : {"branch_0.csv", "branch_2.csv"}) {
        std::istringstream in(read_file(out / name));
        std::string line, last;
        std::getline(in, line);
        CHECK(line.rfind("Omega,x0_h0", 0) == 0);
        int changes = 0;
        while (std::getline(in, line)) {
            const std::string label = line.substr(line.rfind(',') + 1);
            if (!last.empty() && label != last)
                ++changes;
            last = label;
        }
        // stable -> unstable -> stable
        CHECK(changes == 2);
    }
}

TEST_CASE("forced reproduction config writes every branch and analysis")
{
    const fs::path out = scratch("fig5");
    REQUIRE(cli("run " + (config_dir / "duffing_fig5.config").string() + " --output-dir " + out.string()) == 0);
    const auto files = listing(out);
    for (const char* f : {"solution_0.json", "solution_1.json", "solution_2.json", "summary.csv", "marginal.json",
                          "mc_difference.csv", "moments.csv", "manifest.json"})
        CHECK(files.count(f) == 1);
    const json m = read_json(out / "manifest.json");
    CHECK(m["exit_code"] == 0);
}

TEST_CASE("runs are deterministic and the manifest lists every artifact")
{
    const fs::path cfg = scratch("small.config");
    write_json(cfg, small_config());
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    REQUIRE(cli("run " + cfg.string() + " --seed 3 --output-dir " + a.string()) == 0);
    REQUIRE(cli("run " + cfg.string() + " --seed 3 --output-dir " + b.string()) == 0);

    const auto files = listing(a);
    REQUIRE(files == listing(b));
    for (const auto& f : files)
        if (f != "manifest.json") {
            INFO(f);
            CHECK(read_file(a / f) == read_file(b / f));
        }

    const json manifest = read_json(a / "manifest.json");
    CHECK(manifest["seed"] == 3);
    std::set<std::string> listed;
    for (const auto& f : manifest["artifacts"])
        listed.insert(f.get<std::string>());
    std::set<std::string> expected = files;
    expected.erase("manifest.json");
    CHECK(listed == expected);
    CHECK(files.count("phase_portrait.csv") == 1);
    CHECK(files.count("coefficient_grid.csv") == 1);

    // a different seed changes the sampled artifacts
    const fs::path c = scratch("run_c");
    REQUIRE(cli("run " + cfg.string() + " --seed 4 --output-dir " + c.string()) == 0);
    CHECK(read_file(a / "summary.csv") != read_file(c / "summary.csv"));
    CHECK(read_file(a / "solution_0.json") == read_file(c / "solution_0.json"));
}

TEST_CASE("existing non-run directories are not replaced")
{
    const fs::path cfg = scratch("small2.config");
    write_json(cfg, small_config());
    const fs::path out = scratch("occupied");
    fs::create_directories(out);
    std::ofstream(out / "keep.txt") << "data";
    CHECK(cli("run " + cfg.string() + " --output-dir " + out.string()) == 1);
    CHECK(fs::exists(out / "keep.txt"));
}
