#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mebench/presets.hpp"
#include "mebench/runner.hpp"

using namespace mebench;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(double gamma) {
    const double w = 2.0 * kPi;
    ExperimentConfig c;
    c.experiment = "small";
    c.energies = {-w / 2, w / 2};
    TransitionConfig t;
    t.gamma = gamma;
    c.transitions = {t};
    c.bath.cutoff = 10.0 * w;
    DriveSpec d;
    d.omega_d = w;
    d.rabi = ConstantSignal{w / 8};
    c.drives = {d};
    c.duration.value = 0.5;
    c.solver.dt = 1.0 / 2000.0;
    c.modes = {Mode::H, Mode::MME};
    return c;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mebench_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_flag(const RunResult& r, const std::string& f) {
    return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("config JSON round trip is idempotent") {
    ExperimentConfig c = small_config(1e-3);
    c.sample_seed = 17;
    c.drives[0].rabi = sample_gaussian_fourier(RngSeed{3}, 4, 0.5);
    c.duration.policy = DurationPolicy::InverseRms;
    c.duration.value = 1.0;
    c.duration.max_duration = 3.0;
    c.solver.stepper = Stepper::Midpoint;
    c.solver.mapping = ChainMapping::Lanczos;
    const nlohmann::json j = c;
    const ExperimentConfig back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back).dump() == j.dump());
    CHECK(config_hash(back) == config_hash(c));
    CHECK(settings_hash(back.solver) == settings_hash(c.solver));
}

TEST_CASE("config shorthands") {
    const nlohmann::json j = {{"experiment", "short"},
                              {"levels", {{"kind", "vee"}, {"omega", 4.0}, {"omega2", 2.0}}},
                              {"transitions", {{{"lower", 0}, {"upper", 2}, {"gamma", 1e-3}}}},
                              {"bath", {{"cutoff_ratio", 10.0}}},
                              {"duration", {{"policy", "fixed"}, {"value", 1.0}}},
                              {"modes", {"H", "MME"}}};
    const ExperimentConfig c = j.get<ExperimentConfig>();
    CHECK(c.energies == std::vector<double>{0.0, 2.0, 4.0});
    CHECK(c.bath.cutoff == doctest::Approx(40.0));
    CHECK(observed_level(c) == 2);
    CHECK(c.modes.size() == 2);
}

TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
        ExperimentConfig c = small_config(1e-3);
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(validate(small_config(1e-3)));
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.transitions[0].g = 0.1; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.transitions[0].upper = 5; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.bath.cutoff = 1.0; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.solver.dt = 0.0; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.solver.fock_dim = 1; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.modes.clear(); })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.schema_version = 2; })), ValidationError);
    CHECK_THROWS_AS(validate(bad([](auto& c) {
                        c.duration.policy = DurationPolicy::InverseRabi;
                        c.drives[0].rabi = sample_gaussian_fourier(RngSeed{1}, 2, 1.0);
                    })),
                    ValidationError);
    CHECK_THROWS_AS(parse_modes("H,XYZ"), ValidationError);
    CHECK(parse_modes("EXACT,H").size() == 2);
    CHECK_THROWS_AS(nlohmann::json({{"experiment", "x"}}).get<ExperimentConfig>(), std::exception);
}

TEST_CASE("config files and file references") {
    const fs::path dir = scratch("files");
    const nlohmann::json drive = small_config(1e-3).drives[0];
    std::ofstream(dir / "drive.json") << drive.dump();
    nlohmann::json j = small_config(1e-3);
    j["drives"] = {{{"file", "drive.json"}}};
    std::ofstream(dir / "config.json") << j.dump(1);
    const ExperimentConfig c = load_config((dir / "config.json").string());
    CHECK(nlohmann::json(c.drives[0]).dump() == drive.dump());
    j["drives"] = {{{"file", "missing.json"}}};
    std::ofstream(dir / "broken.json") << j.dump();
    CHECK_THROWS_AS(load_config((dir / "broken.json").string()), ValidationError);
    CHECK_THROWS_AS(load_config((dir / "nothing.json").string()), ValidationError);
}

TEST_CASE("duration policies") {
    ExperimentConfig c = small_config(1e-3);
    c.duration.value = 0.50002;
    CHECK(resolve_duration(c) == doctest::Approx(0.5).epsilon(1e-14));
    c.duration.policy = DurationPolicy::InverseRabi;
    CHECK(resolve_duration(c) == doctest::Approx(8.0).epsilon(1e-12));
    c.duration.max_duration = 2.0;
    CHECK(resolve_duration(c) == doctest::Approx(2.0).epsilon(1e-12));

    ExperimentConfig r = small_config(1e-3);
    r.drives[0].rabi = sample_gaussian_fourier(RngSeed{5}, 20, 0.3);
    r.duration.policy = DurationPolicy::InverseRms;
    r.duration.value = 0.5;
    const double T = resolve_duration(r);
    CHECK(std::abs(T - 4.0 * kPi) <= 0.5 * r.solver.dt);
    CHECK(std::abs(T / r.solver.dt - std::round(T / r.solver.dt)) < 1e-9);
    const ExperimentConfig p = prepare(r, T);
    const ControlSignal& rabi = p.drives[0].rabi;
    CHECK(rms_over(rabi, T, default_quadrature_step(rabi, T)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("zero damping leaves epsilon undefined") {
    const RunResult r = run(small_config(0.0));
    CHECK(r.reports.count(Mode::MME) == 1);
    CHECK_FALSE(r.reports.at(Mode::MME).epsilon.has_value());
    CHECK(r.reports.at(Mode::MME).delta0 == 0.0);
    CHECK(has_flag(r, "epsilon_undefined"));
    const auto rows = ledger_rows(r);
    REQUIRE(rows.size() == 1);
    CHECK(ledger_csv(rows).find(",undefined,") != std::string::npos);
}

TEST_CASE("ME modes without an exact reference are flagged") {
    const RunResult r = run(small_config(1e-2));
    CHECK(r.reports.empty());
    CHECK(has_flag(r, "no_exact_reference"));
    CHECK(r.populations.count(Mode::H) == 1);
    const auto rows = ledger_rows(r);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].epsilon.has_value());
    CHECK_FALSE(rows[0].delta0.has_value());
    CHECK(rows[0].delta1 > 0.0);
}

TEST_CASE("short chain raises reflection and light-cone flags") {
    ExperimentConfig c = small_config(0.05);
    c.drives.clear();
    c.initial_level = 1;
    c.modes = {Mode::H, Mode::MME, Mode::EXACT};
    c.solver.chain_length = 4;
    const RunResult r = run(c);
    CHECK(has_flag(r, "light cone"));
    CHECK(has_flag(r, "reflection"));
    CHECK(r.reports.at(Mode::MME).epsilon.has_value());
    CHECK(r.metadata["exact"]["chain_length"] == 4);
    CHECK(ledger_rows(r)[0].flags.find("reflection") != std::string::npos);
}

TEST_CASE("empty sweep writes a header-only ledger") {
    const SweepResult s = run_sweep({}, 2);
    CHECK(s.rows.empty());
    CHECK(ledger_csv(s.rows) == std::string(kLedgerHeader) + "\n");
    CHECK(stats_csv(s.stats).find('\n') == stats_csv(s.stats).size() - 1);
}

TEST_CASE("ledger append keeps one header") {
    const fs::path dir = scratch("ledger");
    const auto rows = ledger_rows(run(small_config(0.0)));
    const std::string path = (dir / "ledger.csv").string();
    write_ledger(path, rows);
    write_ledger(path, rows, true);
    const std::string text = slurp(path);
    CHECK(text.rfind(kLedgerHeader, 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find(kLedgerHeader, 1) == std::string::npos);
    write_ledger(path, rows);
    const std::string fresh = slurp(path);
    CHECK(std::count(fresh.begin(), fresh.end(), '\n') == 2);
    std::ofstream(dir / "other.csv") << "a,b\n";
    CHECK_THROWS_AS(write_ledger((dir / "other.csv").string(), rows, true), ValidationError);
    CHECK_FALSE(fs::exists(dir / "ledger.csv.tmp"));
}

TEST_CASE("ensemble statistics recompute from the rows") {
    std::vector<LedgerRow> rows;
    const std::vector<double> eps{0.1, 0.3, 0.2, 0.6};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        LedgerRow r;
        r.experiment_id = "e@1";
        r.axis = 0.25;
        r.mode = "MME";
        r.epsilon = eps[i];
        r.sample_seed = i;
        rows.push_back(r);
    }
    LedgerRow undefined = rows[0];
    undefined.epsilon.reset();
    rows.push_back(undefined);
    LedgerRow other = rows[0];
    other.mode = "AME";
    rows.push_back(other);
    const auto stats = ensemble_statistics(rows);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].mode == "MME");
    CHECK(stats[0].samples == 4);
    CHECK(stats[0].mean == doctest::Approx(0.3));
    const double sd = std::sqrt((0.04 + 0.0 + 0.01 + 0.09) / 4.0);
    CHECK(stats[0].stddev == doctest::Approx(sd));
    CHECK(stats[0].mean_plus_2sigma == doctest::Approx(0.3 + 2.0 * sd));
    CHECK(stats[1].samples == 1);
}

TEST_CASE("distinct solver settings give distinct experiment ids") {
    ExperimentConfig a = small_config(0.0), b = small_config(0.0);
    b.solver.svd_cutoff = 1e-12;
    const RunResult ra = run(a), rb = run(b);
    CHECK(ra.experiment_id != rb.experiment_id);
    CHECK(ra.experiment_id.rfind("small@", 0) == 0);
    b.solver = a.solver;
    b.axis = 3.0;
    CHECK(run(b).experiment_id == ra.experiment_id);
}

TEST_CASE("sweep keeps input order across workers") {
    std::vector<ExperimentConfig> cs;
    for (int k = 0; k < 5; ++k) {
        ExperimentConfig c = small_config(0.0);
        c.axis = k;
        c.duration.value = 0.1 * (k + 1);
        cs.push_back(c);
    }
    const SweepResult one = run_sweep(cs, 1), many = run_sweep(cs, 3);
    CHECK(ledger_csv(one.rows) == ledger_csv(many.rows));
    for (int k = 0; k < 5; ++k) CHECK(many.runs[static_cast<std::size_t>(k)].config.axis == k);

    cs[2].transitions[0].upper = 9;
    CHECK_THROWS_AS(run_sweep(cs, 2), ValidationError);
}

TEST_CASE("series and results output") {
    SweepResult s = run_sweep({small_config(0.0)});
    const std::string csv = series_csv(s.runs[0]);
    CHECK(csv.rfind("t,p_H,p_MME", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(s.runs[0].times.size()) + 1);
    const nlohmann::json j = results_json(s);
    CHECK(j["runs"].size() == 1);
    CHECK(j.contains("generated_at"));
}

TEST_CASE("preset sizes") {
    PresetOptions o;
    CHECK(preset("fig4a", o).size() == 28 * 4);
    CHECK(preset("fig4b", o).size() == 20 * 4);
    CHECK(preset("fig3", o).size() == 12);
    CHECK(preset("fig6", o).size() == 9);
    CHECK(preset("fig6-inset", o).size() == 8 * 3 * 2);
    CHECK(preset("fig7b", o).size() == 10);
    CHECK(preset("fig7c", o).size() == 9);
    o.samples = 3;
    CHECK(preset("fig4a", o).size() == 12);
    o.profile = Profile::Smoke;
    o.samples.reset();
    CHECK(preset("fig4a", o).size() == 4);
    CHECK_THROWS_AS(preset("fig9", o), ValidationError);
    for (const auto& c : preset("fig7", PresetOptions{})) CHECK_NOTHROW(validate(c));
}

TEST_CASE("fig4 presets are seeded and deterministic") {
    PresetOptions o;
    o.profile = Profile::Smoke;
    o.modes = {Mode::H, Mode::MME};
    const auto a = preset("fig4a", o), b = preset("fig4a", o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(nlohmann::json(a[i]).dump() == nlohmann::json(b[i]).dump());
    CHECK(a[0].sample_seed == 1u);
    CHECK(a[2].sample_seed == 2u);
    CHECK(ledger_csv(run_sweep(a, 1).rows) == ledger_csv(run_sweep(b, 2).rows));
    o.seed = 2;
    CHECK(nlohmann::json(preset("fig4a", o)[0]).dump() == nlohmann::json(a[2]).dump());
}

}
