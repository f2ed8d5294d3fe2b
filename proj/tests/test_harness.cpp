// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "bidir/bidir.hpp"

using namespace bidir;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small(Algorithm a)
{
    ScenarioConfig c;
    c.scenario_id = "unit";
    c.algorithm = a;
    c.fading.alpha = 0.9;
    c.L = 200;
    c.budget = {10, 1};
    c.snr_db = {15.0};
    c.n_blocks = 6;
    c.n_trials = 8;
    c.seed = 77;
    return c;
}

bool same(const TrialResult& a, const TrialResult& b)
{
    if (a.per_block.size() != b.per_block.size() || a.seed_used != b.seed_used)
        return false;
    for (std::size_t i = 0; i < a.per_block.size(); ++i) {
        const auto& x = a.per_block[i];
        const auto& y = b.per_block[i];
        if (x.block_index != y.block_index || x.sum_rate_bits != y.sum_rate_bits
            || x.throughput_bits != y.throughput_bits || x.overhead_symbols != y.overhead_symbols
            || x.per_user_sinr != y.per_user_sinr)
            return false;
    }
    return true;
}

struct ScopedEnv {
    std::string name;
    std::optional<std::string> old;
    ScopedEnv(std::string n, const std::string& value) : name(std::move(n))
    {
        if (const char* v = std::getenv(name.c_str()))
            old = v;
        setenv(name.c_str(), value.c_str(), 1);
    }
    ~ScopedEnv()
    {
        if (old)
            setenv(name.c_str(), old->c_str(), 1);
        else
            unsetenv(name.c_str());
    }
};

fs::path scratch_dir(const std::string& tag)
{
    const auto dir = fs::temp_directory_path() / ("bidir_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_sim(const std::string& args)
{
    const char* bin = std::getenv("SIM_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("run_trial is deterministic in (config, seed)")
{
    for (auto a : {Algorithm::bidir_ls, Algorithm::bidir_rls, Algorithm::forward_only, Algorithm::genie_per_block,
                   Algorithm::maxsinr_genie}) {
        const auto cfg = small(a);
        const auto r1 = run_trial(cfg, 1234);
        const auto r2 = run_trial(cfg, 1234);
        CHECK(same(r1, r2));
        CHECK_FALSE(same(r1, run_trial(cfg, 1235)));
        REQUIRE(r1.per_block.size() == 6);
        for (std::size_t b = 0; b < 6; ++b) {
            CHECK(r1.per_block[b].block_index == b + 1);
            CHECK(r1.per_block[b].throughput_bits <= r1.per_block[b].sum_rate_bits);
        }
    }
}

TEST_CASE("maxsinr_genie on a static channel gives the same rate every block")
{
    auto cfg = small(Algorithm::maxsinr_genie);
    cfg.fading.alpha = 1.0;
    cfg.maxsinr_iters = 30;
    const auto r = run_trial(cfg, 9);
    for (std::size_t b = 1; b < r.per_block.size(); ++b)
        CHECK(r.per_block[b].sum_rate_bits == r.per_block[0].sum_rate_bits);
    for (const auto& blk : r.per_block) {
        CHECK(blk.overhead_symbols == 0);
        CHECK(blk.throughput_bits == blk.sum_rate_bits);
    }
}

TEST_CASE("overhead and throughput accounting per block")
{
    const auto ls = run_trial(small(Algorithm::bidir_ls), 3);
    for (const auto& blk : ls.per_block) {
        CHECK(blk.overhead_symbols == 20);
        CHECK(blk.throughput_bits == Catch::Approx(blk.sum_rate_bits * 0.9).epsilon(1e-14));
        CHECK(blk.throughput_bits < blk.sum_rate_bits);
    }
    auto cfg = small(Algorithm::bidir_ls);
    cfg.budget = {5, 3};
    for (const auto& blk : run_trial(cfg, 3).per_block)
        CHECK(blk.overhead_symbols == 30);
    for (const auto& blk : run_trial(small(Algorithm::bidir_rls), 3).per_block)
        CHECK(blk.overhead_symbols == 20);
    for (const auto& blk : run_trial(small(Algorithm::genie_per_block), 3).per_block)
        CHECK(blk.throughput_bits == blk.sum_rate_bits);
}

TEST_CASE("run_monte_carlo with one trial reproduces run_trial")
{
    auto cfg = small(Algorithm::bidir_ls);
    cfg.n_trials = 1;
    const auto rows = run_monte_carlo(cfg);
    const auto t = run_trial(cfg, trial_seed(cfg.seed, 0));
    REQUIRE(rows.size() == 7);
    double avg = 0.0;
    for (std::size_t b = 0; b < 6; ++b) {
        CHECK(rows[b].block_index == static_cast<long>(b + 1));
        CHECK(rows[b].sum_rate_mean == t.per_block[b].sum_rate_bits);
        CHECK(rows[b].throughput_mean == t.per_block[b].throughput_bits);
        CHECK(rows[b].sum_rate_stderr == 0.0);
        avg += t.per_block[b].sum_rate_bits / 6.0;
    }
    CHECK_FALSE(rows[6].block_index.has_value());
    CHECK(rows[6].sum_rate_mean == Catch::Approx(avg).epsilon(1e-14));
    CHECK(rows[6].M == 10);
    CHECK(rows[6].cycles == 1);
    CHECK(rows[6].seed == 77);
}

TEST_CASE("estimate is invariant to the order of trials")
{
    std::vector<double> xs{3.5, 1.25, 9.0, -2.0, 4.75, 0.5};
    const auto e1 = estimate(xs);
    std::reverse(xs.begin(), xs.end());
    std::swap(xs[1], xs[4]);
    const auto e2 = estimate(xs);
    CHECK(e1.mean == Catch::Approx(e2.mean).epsilon(1e-15));
    CHECK(e1.stderr_ == Catch::Approx(e2.stderr_).epsilon(1e-15));
    CHECK(e1.mean == Catch::Approx(17.0 / 6.0));
}

TEST_CASE("thread count does not change the results")
{
    const auto cfg = small(Algorithm::bidir_rls);
    std::vector<CurveRecord> one, many;
    {
        ScopedEnv env("SIM_THREADS", "1");
        CHECK(worker_count() == 1);
        one = run_monte_carlo(cfg);
    }
    {
        ScopedEnv env("SIM_THREADS", "3");
        CHECK(worker_count() == 3);
        many = run_monte_carlo(cfg);
    }
    CHECK(one == many);
}

TEST_CASE("i.i.d. blocks give a flat per-block mean after the first block")
{
    auto cfg = small(Algorithm::bidir_ls);
    cfg.fading.alpha = 0.0;
    cfg.n_blocks = 8;
    cfg.n_trials = 200;
    const auto rows = run_monte_carlo(cfg);
    double grand = 0.0;
    for (std::size_t b = 1; b < 8; ++b)
        grand += rows[b].sum_rate_mean / 7.0;
    for (std::size_t b = 1; b < 8; ++b)
        CHECK(std::abs(rows[b].sum_rate_mean - grand) <= 2.0 * rows[b].sum_rate_stderr);
}

TEST_CASE("trial seeds are distinct and derived from the base seed")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i)
        seen.insert(trial_seed(5, i));
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(5, 0) != trial_seed(6, 0));
    CHECK(trial_seed(5, 3) == trial_seed(5, 3));
}

TEST_CASE("sweep axes")
{
    auto base = small(Algorithm::bidir_ls);
    base.budget = {16, 4};
    const auto t = apply_axis(base, SweepAxis::training_length, 40);
    CHECK(t.budget.cycles == 4);
    CHECK(t.budget.M == 5);
    const auto c = apply_axis(base, SweepAxis::cycles, 2);
    CHECK(c.budget.cycles == 2);
    CHECK(c.budget.M == 32);
    CHECK(apply_axis(base, SweepAxis::snr_db, 25).snr_db == std::vector<double>{25.0});
    CHECK(apply_axis(base, SweepAxis::lambda, 0.7).lambda == 0.7);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::training_length, 42), Error);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::cycles, 3), Error);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::cycles, 0.5), Error);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::training_length, 400), Error);
    CHECK_THROWS_AS(sweep_axis_from_string("bogus"), Error);

    // Points share their random numbers: an axis the algorithm ignores gives identical rows.
    auto ls = small(Algorithm::bidir_ls);
    const auto rows = sweep(ls, SweepAxis::lambda, {0.5, 0.9});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].axis_value == 0.5);
    CHECK(rows[1].axis_value == 0.9);
    CHECK(rows[0].sum_rate_mean == rows[1].sum_rate_mean);
    CHECK_THROWS_AS(sweep(ls, SweepAxis::lambda, {}), Error);
}

TEST_CASE("config parsing")
{
    const auto cfg = config_from_json(nlohmann::json::parse(R"({
        "scenario_id": "x", "algorithm": "bidir_rls", "alpha": 0.99, "L": 100, "M": 4,
        "lambda": 0.5, "snr_db": [0, 10], "n_trials": 3, "seed": 18446744073709551615
    })"));
    CHECK(cfg.scenario_id == "x");
    CHECK(cfg.algorithm == Algorithm::bidir_rls);
    CHECK(cfg.fading.alpha == 0.99);
    CHECK(cfg.snr_db == std::vector<double>{0.0, 10.0});
    CHECK(cfg.seed == 18446744073709551615ULL);
    CHECK(cfg.network.active == std::vector<bool>{true, true, true});

    auto code_of = [](const char* text) {
        try {
            config_from_json(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Singular; // sentinel: parsed fine
    };
    CHECK(code_of(R"({"bogus": 1})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"M": "ten"})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"M": 600, "L": 1000})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"algorithm": "bidir_rls", "cycles": 2})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"algorithm": "nope"})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"alpha": 1.5})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"({"active_users": [false, false, false]})") == ErrorCode::ConfigInvalid);
    CHECK(code_of(R"([1, 2])") == ErrorCode::ConfigInvalid);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), Error);
}

TEST_CASE("CSV and JSON emission")
{
    CurveRecord r;
    r.scenario_id = "a,\"b\"";
    r.axis_value = 0.1 + 0.2;
    r.snr_db = 30.0;
    r.alpha = 0.999;
    r.lambda = 0.7;
    r.M = 16;
    r.cycles = 2;
    r.block_index = 7;
    r.sum_rate_mean = 12.345678901234567;
    r.sum_rate_stderr = 1.0 / 3.0;
    r.throughput_mean = 11.1111111111111;
    r.throughput_stderr = 2e-17;
    r.n_trials = 500;
    r.seed = 18446744073709551615ULL;
    CurveRecord avg = r;
    avg.axis_value.reset();
    avg.block_index.reset();
    const std::vector<CurveRecord> rows{r, avg};

    const auto csv = to_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "scenario_id,axis_value,snr_db,alpha,lambda,M,cycles,block_index_or_avg,sum_rate_bits_mean,"
          "sum_rate_stderr,throughput_bits_mean,throughput_stderr,n_trials,seed");
    CHECK(csv.find(",avg,") != std::string::npos);
    CHECK(csv.find("12.3456789012,") != std::string::npos);

    auto rounded = rows;
    for (auto& x : rounded) {
        if (x.axis_value)
            x.axis_value = round12(*x.axis_value);
        x.sum_rate_mean = round12(x.sum_rate_mean);
        x.sum_rate_stderr = round12(x.sum_rate_stderr);
        x.throughput_mean = round12(x.throughput_mean);
        x.throughput_stderr = round12(x.throughput_stderr);
    }
    const auto from_csv = parse_csv(csv);
    CHECK(from_csv == rounded);
    const auto from_json = parse_json(nlohmann::json::parse(render(rows, Format::json)));
    CHECK(from_json == from_csv);
    CHECK(parse_csv(to_csv(from_csv)) == from_csv);
    CHECK_THROWS_AS(parse_csv("wrong,header\n"), Error);

    const auto dir = scratch_dir("emit");
    emit(rows, Format::json, (dir / "x.json").string());
    CHECK(parse_json(nlohmann::json::parse(read_file(dir / "x.json"))) == from_csv);
    try {
        emit(rows, Format::csv, (dir / "missing" / "x.csv").string());
        FAIL("expected an IO error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("No such file or directory") != std::string::npos);
    }
    CHECK_THROWS_AS(emit({}, Format::csv, (dir / "y.csv").string()), Error);
    fs::remove_all(dir);
}

TEST_CASE("sim CLI: outputs and exit codes")
{
    const auto dir = scratch_dir("cli");
    write_file(dir / "ok.json", R"({"scenario_id": "cli_ok", "alpha": 0.9, "L": 100, "M": 5,
                                   "snr_db": 10, "n_blocks": 3, "n_trials": 2, "seed": 4})");
    write_file(dir / "unknown.json", R"({"scenario_id": "x", "colour": "blue"})");
    write_file(dir / "long.json", R"({"L": 10, "M": 8})");
    write_file(dir / "broken.json", "{not json");
    const std::string out = " --out " + (dir / "out").string();

    CHECK(run_sim("run --config " + (dir / "ok.json").string() + out) == 0);
    const auto csv = read_file(dir / "out" / "cli_ok.csv");
    CHECK(csv.rfind(kCsvHeader, 0) == 0);
    CHECK(parse_csv(csv).size() == 4);

    CHECK(run_sim("run --config " + (dir / "ok.json").string() + out + " --format json --trials 3 --seed 9") == 0);
    const auto js = parse_json(nlohmann::json::parse(read_file(dir / "out" / "cli_ok.json")));
    REQUIRE(js.size() == 4);
    CHECK(js[0].n_trials == 3);
    CHECK(js[0].seed == 9);

    CHECK(run_sim("sweep --config " + (dir / "ok.json").string() + " --axis training_length --values 10,20" + out) == 0);
    const auto sw = parse_csv(read_file(dir / "out" / "cli_ok.csv"));
    REQUIRE(sw.size() == 2);
    CHECK(sw[0].M == 5);
    CHECK(sw[1].M == 10);

    CHECK(run_sim("run --config " + (dir / "unknown.json").string() + out) == 2);
    CHECK(run_sim("run --config " + (dir / "long.json").string() + out) == 2);
    CHECK(run_sim("run --config " + (dir / "broken.json").string() + out) == 2);
    CHECK(run_sim("run --config " + (dir / "nope.json").string() + out) == 2);
    CHECK(run_sim("run" + out) == 2);
    CHECK(run_sim("run --config " + (dir / "ok.json").string() + " --format xml" + out) == 2);
    CHECK(run_sim("sweep --config " + (dir / "ok.json").string() + " --axis bogus --values 1" + out) == 2);
    CHECK(run_sim("preset fig9" + out) == 2);
    fs::remove_all(dir);
}
