#include "mebench/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mebench {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Warning text starts with its category, e.g. "reflection: ...".
std::string category(const std::string& warning) { return warning.substr(0, warning.find(':')); }

TruncationPolicy policy_of(const SolverSettings& s) {
    TruncationPolicy p;
    p.chi_max = s.chi_max;
    p.svd_cutoff = s.svd_cutoff;
    p.abort_discarded_weight = s.abort_discarded_weight;
    return p;
}

ChainRunOptions chain_options(const SolverSettings& s) {
    ChainRunOptions o;
    o.dt = s.dt;
    o.record_every = s.record_every;
    o.stepper = s.stepper;
    o.policy = policy_of(s);
    o.reflection_threshold = s.reflection_threshold;
    o.fock_threshold = s.fock_threshold;
    o.light_cone_safety = s.light_cone_safety;
    return o;
}

MPSState initial_chain_state(const ExperimentConfig& c, int chain_length, int fock_dim) {
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(c.energies.size()));
    psi(c.initial_level) = 1.0;
    return init_state(psi, chain_length, fock_dim);
}

} // namespace

double resolve_duration(const ExperimentConfig& c) {
    const auto& d = c.duration;
    double t = 0.0;
    switch (d.policy) {
    case DurationPolicy::Fixed: t = d.value; break;
    case DurationPolicy::InverseRabi:
        t = d.factor * 2.0 * kPi / std::abs(std::get<ConstantSignal>(c.drives.front().rabi).value);
        break;
    case DurationPolicy::InverseRms: t = d.factor * 2.0 * kPi / d.value; break;
    }
    if (d.max_duration) t = std::min(t, *d.max_duration);
    const auto n = std::max<long long>(1, std::llround(t / c.solver.dt));
    return static_cast<double>(n) * c.solver.dt;
}

ExperimentConfig prepare(const ExperimentConfig& c, double duration) {
    ExperimentConfig out = c;
    if (c.duration.policy == DurationPolicy::InverseRms)
        out.drives.front().rabi = scale_to_rms(c.drives.front().rabi, c.duration.value, duration);
    return out;
}

ChainCoefficients chain_for(const ExperimentConfig& c, double duration) {
    const int m = c.solver.chain_length > 0
                      ? c.solver.chain_length
                      : light_cone_length(c.bath.cutoff, duration, c.solver.light_cone_safety);
    if (c.solver.mapping == ChainMapping::Analytic) return analytic_flat_chain_coefficients(m, c.bath.cutoff, 1.0);
    require(c.solver.lanczos_modes >= m, "lanczos_modes must be at least the chain length");
    ChainCoefficients full = star_to_chain(discretize(c.bath, 1.0, c.solver.lanczos_modes));
    require(static_cast<int>(full.size()) >= m, "Lanczos recursion ended before the requested chain length");
    full.onsite.resize(static_cast<std::size_t>(m));
    full.hopping.resize(static_cast<std::size_t>(m - 1));
    return full;
}

ChainEvolutionResult run_exact(const ExperimentConfig& c, double duration, const ChainCoefficients* chain_override) {
    const OpenSystem system = build_system(c);
    const ChainCoefficients chain = chain_override ? *chain_override : chain_for(c, duration);
    const ChainHamiltonian ham = build_chain_hamiltonian(system, chain, c.solver.fock_dim);
    return evolve(ham, initial_chain_state(c, static_cast<int>(chain.size()), c.solver.fock_dim), 0.0, duration,
                  chain_options(c.solver));
}

RunResult run(const ExperimentConfig& input) {
    validate(input);
    RunResult r;
    r.duration = resolve_duration(input);
    r.config = prepare(input, r.duration);
    const ExperimentConfig& c = r.config;
    r.config_hash = config_hash(input);
    r.settings_hash = settings_hash(c.solver);
    r.experiment_id = c.experiment + "@" + r.settings_hash.substr(0, 8);
    r.observed_level = observed_level(c);

    const OpenSystem system = build_system(c);
    for (const auto& w : system.degeneracy_warnings()) r.warnings.push_back("degeneracy: " + w);

    std::set<Mode> modes(c.modes.begin(), c.modes.end());
    const bool wants_me = modes.count(Mode::MME) || modes.count(Mode::AME);
    if (wants_me) modes.insert(Mode::H);

    IntegrationOptions io;
    io.dt = c.solver.dt;
    io.record_every = c.solver.record_every;
    io.tracked_levels = {r.observed_level};
    const DensityMatrix rho0 = DensityMatrix::basis_state(system.dim(), c.initial_level);
    GeneratorOptions go;
    go.lamb_shift = c.solver.lamb_shift;
    go.degeneracy_tol = c.solver.degeneracy_tol;

    nlohmann::json timing = nlohmann::json::object();
    auto store = [&](Mode m, const std::vector<double>& times, std::vector<double> p) {
        if (r.times.empty()) r.times = times;
        require(times.size() == r.times.size(), "mode grids differ");
        for (std::size_t i = 0; i < times.size(); ++i)
            require(std::abs(times[i] - r.times[i]) <= 1e-9 * std::max(1.0, r.duration), "mode grids differ");
        r.populations[m] = std::move(p);
    };
    auto with_context = [&](Mode m, auto&& body) {
        const auto start = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const DegenerateFrameError&) {
            throw;
        } catch (const SolverError& e) {
            throw SolverError(r.experiment_id + " mode " + to_string(m) + ": " + e.what());
        }
        timing[to_string(m)] = seconds_since(start);
    };

    if (modes.count(Mode::H))
        with_context(Mode::H, [&] {
            const auto res = integrate(HamiltonianGenerator(system), rho0, 0.0, r.duration, io);
            store(Mode::H, res.times, res.populations[0]);
        });
    if (modes.count(Mode::MME))
        with_context(Mode::MME, [&] {
            const auto res = integrate(MarkovianGenerator(system, go), rho0, 0.0, r.duration, io);
            store(Mode::MME, res.times, res.populations[0]);
            r.metadata["mme_min_eigenvalue"] = *std::min_element(res.min_eigenvalue.begin(), res.min_eigenvalue.end());
        });
    if (modes.count(Mode::AME)) {
        try {
            with_context(Mode::AME, [&] {
                const auto res = integrate(AdiabaticGenerator(system, go), rho0, 0.0, r.duration, io);
                store(Mode::AME, res.times, res.populations[0]);
            });
        } catch (const DegenerateFrameError& e) {
            r.warnings.push_back(std::string("ame_degenerate: ") + e.what());
        }
    }
    if (modes.count(Mode::EXACT))
        with_context(Mode::EXACT, [&] {
            const auto res = run_exact(c, r.duration);
            store(Mode::EXACT, res.times, res.populations[static_cast<std::size_t>(r.observed_level)]);
            for (const auto& w : res.warnings) r.warnings.push_back(w);
            if (res.truncation.discarded_weight > 1e-6)
                r.warnings.push_back("truncation: discarded weight " + num(res.truncation.discarded_weight));
            r.metadata["exact"] = {{"chain_length", res.final_state.length() - 1},
                                   {"max_bond_dim", res.truncation.max_bond_dim},
                                   {"discarded_weight", res.truncation.discarded_weight},
                                   {"max_norm_correction", res.max_norm_correction},
                                   {"reflection_peak", res.reflection_peak},
                                   {"top_fock_peak", res.top_fock_peak},
                                   {"steps", res.steps}};
        });

    // Reference for the bath effect.
    std::optional<std::vector<double>> exact;
    if (r.populations.count(Mode::EXACT)) {
        exact = r.populations.at(Mode::EXACT);
    } else {
        bool decoupled = true;
        for (std::size_t n = 0; n < system.transitions().size(); ++n) decoupled = decoupled && system.rate(n) == 0.0;
        if (decoupled && r.populations.count(Mode::H)) exact = r.populations.at(Mode::H);
    }
    for (Mode m : {Mode::MME, Mode::AME}) {
        if (!r.populations.count(m)) continue;
        if (exact) {
            AlignedSeries s{r.times, r.populations.at(Mode::H), *exact, r.populations.at(m)};
            ErrorReport rep = error_report(s);
            rep.metadata["mode"] = to_string(m);
            r.reports[m] = rep;
            if (!rep.epsilon) r.warnings.push_back("epsilon_undefined: " + to_string(m) + " has zero bath effect");
        }
    }
    if (wants_me && !exact) r.warnings.push_back("no_exact_reference: epsilon needs the EXACT mode");

    std::set<std::string> flags;
    for (const auto& w : r.warnings) flags.insert(category(w));
    r.flags.assign(flags.begin(), flags.end());

    nlohmann::json rates = nlohmann::json::array();
    for (std::size_t n = 0; n < system.transitions().size(); ++n) {
        const auto& tr = system.transitions()[n];
        rates.push_back({{"lower", tr.lower}, {"upper", tr.upper}, {"g", tr.g}, {"frequency", tr.frequency},
                         {"gamma", system.rate(n)}, {"lamb_shift", system.shift(n)}});
    }
    r.metadata["transitions"] = rates;
    r.metadata["cutoff"] = c.bath.cutoff;
    r.metadata["duration"] = r.duration;
    r.metadata["solver"] = c.solver;
    if (!c.drives.empty()) {
        const auto& rabi = c.drives.front().rabi;
        const double h = default_quadrature_step(rabi, r.duration);
        r.metadata["rabi_rms"] = rms_over(rabi, r.duration, h);
        r.metadata["rabi_mean_abs"] = mean_abs_over(rabi, r.duration, h);
    }
    r.metadata["seconds"] = timing;
    return r;
}

std::vector<LedgerRow> ledger_rows(const RunResult& r) {
    std::vector<LedgerRow> rows;
    std::string flags;
    for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
    for (Mode m : {Mode::MME, Mode::AME}) {
        if (!r.populations.count(m)) continue;
        LedgerRow row;
        row.experiment_id = r.experiment_id;
        row.axis = r.config.axis;
        row.sample_seed = r.config.sample_seed;
        row.mode = to_string(m);
        row.settings_hash = r.settings_hash;
        row.flags = flags;
        if (r.reports.count(m)) {
            const auto& rep = r.reports.at(m);
            row.epsilon = rep.epsilon;
            row.delta0 = rep.delta0;
            row.delta1 = rep.delta1;
        } else {
            row.delta1 = effect_integral(r.populations.at(Mode::H), r.populations.at(m), r.times);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<EnsembleStat> ensemble_statistics(const std::vector<LedgerRow>& rows) {
    std::vector<EnsembleStat> out;
    std::vector<std::vector<double>> values;
    for (const auto& row : rows) {
        std::size_t k = 0;
        for (; k < out.size(); ++k)
            if (out[k].experiment_id == row.experiment_id && out[k].mode == row.mode && out[k].axis == row.axis) break;
        if (k == out.size()) {
            out.push_back({row.experiment_id, row.mode, row.axis, 0, 0.0, 0.0, 0.0});
            values.emplace_back();
        }
        if (row.epsilon) values[k].push_back(*row.epsilon);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& v = values[k];
        out[k].samples = static_cast<int>(v.size());
        if (v.empty()) continue;
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out[k].mean = mean;
        out[k].stddev = std::sqrt(ss / static_cast<double>(v.size()));
        out[k].mean_plus_2sigma = mean + 2.0 * out[k].stddev;
    }
    return out;
}

SweepResult run_sweep(const std::vector<ExperimentConfig>& configs, int jobs, const ProgressFn& progress) {
    require(jobs >= 1, "jobs must be >= 1");
    SweepResult sweep;
    sweep.runs.resize(configs.size());
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (failure) return;
            }
            try {
                RunResult r = run(configs[i]);
                std::lock_guard<std::mutex> lock(mu);
                sweep.runs[i] = std::move(r);
                ++done;
                if (progress) progress(done, configs.size(), sweep.runs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const int n = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(1, configs.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& r : sweep.runs)
        for (auto& row : ledger_rows(r)) sweep.rows.push_back(std::move(row));
    sweep.stats = ensemble_statistics(sweep.rows);
    return sweep;
}

std::string ledger_csv(const std::vector<LedgerRow>& rows, bool header) {
    std::ostringstream out;
    if (header) out << kLedgerHeader << '\n';
    for (const auto& r : rows) {
        out << r.experiment_id << ',' << num(r.axis) << ',' << (r.sample_seed ? std::to_string(*r.sample_seed) : "")
            << ',' << r.mode << ',' << (r.epsilon ? num(*r.epsilon) : "undefined") << ','
            << (r.delta0 ? num(*r.delta0) : "") << ',' << num(r.delta1) << ',' << r.settings_hash << ','
            << r.flags << '\n';
    }
    return out.str();
}

std::string stats_csv(const std::vector<EnsembleStat>& stats) {
    std::ostringstream out;
    out << "experiment_id,mode,axis,samples,mean,stddev,mean_plus_2sigma\n";
    for (const auto& s : stats)
        out << s.experiment_id << ',' << s.mode << ',' << num(s.axis) << ',' << s.samples << ',' << num(s.mean) << ','
            << num(s.stddev) << ',' << num(s.mean_plus_2sigma) << '\n';
    return out.str();
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw ValidationError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

void write_ledger(const std::string& path, const std::vector<LedgerRow>& rows, bool append) {
    std::string existing;
    if (append && std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        existing = ss.str();
        if (existing.rfind(kLedgerHeader, 0) != 0) throw ValidationError(path + " is not a ledger file");
        if (!existing.empty() && existing.back() != '\n') existing += '\n';
    }
    write_text_atomic(path, existing.empty() ? ledger_csv(rows, true) : existing + ledger_csv(rows, false));
}

nlohmann::json results_json(const SweepResult& sweep) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : sweep.runs) {
        nlohmann::json reports = nlohmann::json::object();
        for (const auto& [m, rep] : r.reports) reports[to_string(m)] = rep;
        runs.push_back({{"experiment_id", r.experiment_id},
                        {"config", r.config},
                        {"config_hash", r.config_hash},
                        {"settings_hash", r.settings_hash},
                        {"duration", r.duration},
                        {"observed_level", r.observed_level},
                        {"reports", reports},
                        {"flags", r.flags},
                        {"warnings", r.warnings},
                        {"metadata", r.metadata}});
    }
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : sweep.stats)
        stats.push_back({{"experiment_id", s.experiment_id},
                         {"mode", s.mode},
                         {"axis", s.axis},
                         {"samples", s.samples},
                         {"mean", s.mean},
                         {"stddev", s.stddev},
                         {"mean_plus_2sigma", s.mean_plus_2sigma}});
    return {{"schema_version", kSchemaVersion}, {"generated_at", stamp}, {"runs", runs}, {"stats", stats}};
}

std::string series_csv(const RunResult& r) {
    std::ostringstream out;
    out << "t";
    for (const auto& [m, p] : r.populations) out << ",p_" << to_string(m);
    out << '\n';
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        out << num(r.times[i]);
        for (const auto& [m, p] : r.populations) out << ',' << num(p[i]);
        out << '\n';
    }
    return out.str();
}

ConvergenceReport convergence_study(const ExperimentConfig& input, int halvings, double pre_evolve, double window) {
    validate(input);
    require(halvings >= 2, "convergence study needs at least two halvings");
    require(pre_evolve >= 0.0 && window > 0.0, "convergence window must be positive");
    ConvergenceReport rep;
    rep.pre_evolve = pre_evolve;
    rep.window = window;
    const ExperimentConfig c = prepare(input, pre_evolve + window);
    const double dt = c.solver.dt;
    step_count(window, dt);
    if (pre_evolve > 0.0) step_count(pre_evolve, dt);

    const OpenSystem system = build_system(c);
    const ChainCoefficients chain = chain_for(c, pre_evolve + window);
    const ChainHamiltonian ham = build_chain_hamiltonian(system, chain, c.solver.fock_dim);
    ChainRunOptions opts = chain_options(c.solver);
    MPSState start = initial_chain_state(c, static_cast<int>(chain.size()), c.solver.fock_dim);
    if (pre_evolve > 0.0) {
        opts.record_every = 1 << 30;
        start = evolve(ham, start, 0.0, pre_evolve, opts).final_state;
    }

    std::vector<std::vector<Matrix>> states;
    for (int k = 0; k <= halvings; ++k) {
        opts.dt = dt / static_cast<double>(1L << k);
        opts.record_every = 1 << k;
        auto res = evolve(ham, start, pre_evolve, pre_evolve + window, opts);
        for (const auto& w : res.warnings) rep.warnings.push_back(w);
        rep.steps.push_back(opts.dt);
        states.push_back(std::move(res.system_states));
    }
    for (int k = 0; k < halvings; ++k) {
        const auto& a = states[static_cast<std::size_t>(k)];
        const auto& b = states[static_cast<std::size_t>(k + 1)];
        require(a.size() == b.size(), "convergence runs recorded different grids");
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
        rep.differences.push_back(worst);
    }
    rep.steps.pop_back();
    rep.fit = loglog_slope(rep.steps, rep.differences);
    return rep;
}

TruncationStudy fock_truncation_study(const ExperimentConfig& input, int low, int high) {
    validate(input);
    require(low >= 2 && high > low, "need 2 <= low < high");
    TruncationStudy st;
    st.low = low;
    st.high = high;
    const double duration = resolve_duration(input);
    ExperimentConfig c = prepare(input, duration);
    const ChainCoefficients chain = chain_for(c, duration);
    const int level = observed_level(c);
    c.solver.fock_dim = low;
    const auto a = run_exact(c, duration, &chain);
    c.solver.fock_dim = high;
    const auto b = run_exact(c, duration, &chain);
    const auto& pa = a.populations[static_cast<std::size_t>(level)];
    const auto& pb = b.populations[static_cast<std::size_t>(level)];
    require(pa.size() == pb.size(), "truncation runs recorded different grids");
    for (std::size_t i = 0; i < pa.size(); ++i) st.max_population_shift = std::max(st.max_population_shift, std::abs(pa[i] - pb[i]));
    st.top_fock_low = a.top_fock_peak;
    st.top_fock_high = b.top_fock_peak;
    return st;
}

} // namespace mebench
