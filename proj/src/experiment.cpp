#include "drorl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "drorl/baselines.hpp"
#include "drorl/garnet.hpp"
#include "drorl/rng.hpp"
#include "drorl/robust.hpp"

namespace drorl {

namespace {

constexpr std::uint64_t kEtaStream = 0x6574615f73747265ULL;

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    return out;
}

template <class T>
T parse_field(const std::string& text, const std::string& where) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument(where + ": cannot parse '" + text + "'");
    }
    return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

}  // namespace

std::string method_name(Method method) {
    switch (method) {
    case Method::DroHoeffding:
        return "dro_hoeffding";
    case Method::DroBernstein:
        return "dro_bernstein";
    case Method::Lcb:
        return "lcb";
    case Method::Nonrobust:
        return "nonrobust";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string canonical(name);
    std::replace(canonical.begin(), canonical.end(), '-', '_');
    for (Method m : {Method::DroHoeffding, Method::DroBernstein, Method::Lcb, Method::Nonrobust}) {
        if (canonical == method_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown method '" + std::string(name) +
                                "' (expected dro-hoeffding, dro-bernstein, lcb or nonrobust)");
}

std::string coverage_name(Coverage coverage) {
    return coverage == Coverage::Uniform ? "uniform" : "partial";
}

Coverage parse_coverage(std::string_view name) {
    if (name == "uniform") {
        return Coverage::Uniform;
    }
    if (name == "partial") {
        return Coverage::Partial;
    }
    throw std::invalid_argument("unknown coverage '" + std::string(name) +
                                "' (expected uniform or partial)");
}

SolutionRecord solve_dataset(const OfflineDataset& data, Method method, const MethodParams& params) {
    const EmpiricalModel model = estimate_model(data);
    SolutionRecord record;
    record.method = method_name(method);
    record.style = "none";

    auto robust_model = [&](RadiusKind kind) {
        const RadiusStyle style(kind, params.delta);
        if (params.radius_override) {
            return EmpiricalRobustModel(model, Vector(data.num_states() * data.num_actions(),
                                                      *params.radius_override),
                                        style, params.gamma);
        }
        return EmpiricalRobustModel(model, style, params.gamma);
    };

    switch (method) {
    case Method::DroHoeffding:
        record.solution = robust_value_iteration(robust_model(RadiusKind::Hoeffding), params.tol);
        record.style = to_string(RadiusKind::Hoeffding);
        record.delta = params.delta;
        break;
    case Method::DroBernstein:
        record.solution =
            robust_value_iteration_bernstein(robust_model(RadiusKind::Bernstein), data, params.tol);
        record.style = to_string(RadiusKind::Bernstein);
        record.delta = params.delta;
        break;
    case Method::Lcb:
        record.solution = lcb_value_iteration(model, LcbConfig(params.delta, params.lcb_bonus_scale),
                                              params.gamma, params.tol);
        record.delta = params.delta;
        break;
    case Method::Nonrobust:
        record.solution = nonrobust_empirical_vi(model, params.gamma, params.tol);
        break;
    }
    return record;
}

double suboptimality_gap(const TabularMdp& mdp, const DeterministicPolicy& pi, double tol) {
    const Solution optimal = exact_value_iteration(mdp, tol / 10.0);
    const ValueFunction value = policy_evaluation(mdp, pi);
    return scalar_value(optimal.value, mdp.initial_distribution()) -
           scalar_value(value, mdp.initial_distribution());
}

void ExperimentConfig::validate() const {
    if (methods.empty()) {
        throw std::invalid_argument("config: 'methods' must be nonempty");
    }
    if (sizes.empty()) {
        throw std::invalid_argument("config: 'sizes' must be nonempty");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("config: 'seeds' must be nonempty");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) {
            throw std::invalid_argument("config: dataset sizes must be positive");
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw std::invalid_argument("config: 'sizes' must be strictly increasing");
        }
    }
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw std::invalid_argument("config: 'seeds' must be distinct");
    }
    if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size()) {
        throw std::invalid_argument("config: 'methods' must be distinct");
    }
    if (!(delta >= 1e-6 && delta <= 0.5)) {
        throw std::invalid_argument("config: 'delta' must lie in [1e-6, 0.5]");
    }
    if (gamma && !(*gamma >= 0.0 && *gamma < 1.0)) {
        throw std::invalid_argument("config: 'gamma' must lie in [0, 1)");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("config: 'tol' must be positive");
    }
    if (!(lcb_bonus_scale > 0.0)) {
        throw std::invalid_argument("config: 'lcb_bonus_scale' must be positive");
    }
    if (const auto* g = std::get_if<GarnetSource>(&mdp_source)) {
        if (g->states < 2 || g->actions < 1) {
            throw std::invalid_argument("config: Garnet needs states >= 2 and actions >= 1");
        }
    }
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }
    ExperimentConfig cfg;
    try {
        const json& source = doc.at("mdp");
        if (source.contains("garnet")) {
            const json& g = source.at("garnet");
            cfg.mdp_source = GarnetSource{g.at("states").get<std::size_t>(),
                                          g.at("actions").get<std::size_t>(),
                                          g.value("seed", std::uint64_t{0})};
        } else if (source.contains("file")) {
            std::filesystem::path file = source.at("file").get<std::string>();
            cfg.mdp_source = file.is_relative() && !base_dir.empty() ? base_dir / file : file;
        } else {
            throw std::invalid_argument("config: 'mdp' needs a 'garnet' or 'file' entry");
        }
        cfg.coverage = parse_coverage(doc.value("coverage", std::string("uniform")));
        for (const auto& m : doc.at("methods")) {
            cfg.methods.push_back(parse_method(m.get<std::string>()));
        }
        cfg.sizes = doc.at("sizes").get<std::vector<std::size_t>>();
        cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.base_seed = doc.value("base_seed", std::uint64_t{0});
        cfg.delta = doc.value("delta", cfg.delta);
        if (doc.contains("gamma")) {
            cfg.gamma = doc.at("gamma").get<double>();
        }
        cfg.tol = doc.value("tol", cfg.tol);
        cfg.lcb_bonus_scale = doc.value("lcb_bonus_scale", cfg.lcb_bonus_scale);
        if (doc.contains("eta") && !doc.at("eta").is_null()) {
            cfg.eta = doc.at("eta").get<std::size_t>();
        }
        cfg.record_runtime = doc.value("record_runtime", false);
        if (doc.contains("output")) {
            cfg.output = doc.at("output").get<std::string>();
        }
        if (cfg.output.is_relative() && !base_dir.empty()) {
            cfg.output = base_dir / cfg.output;
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_json(read_json_file(path), path.parent_path());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

TabularMdp resolve_mdp(const ExperimentConfig& cfg) {
    if (const auto* g = std::get_if<GarnetSource>(&cfg.mdp_source)) {
        return generate_garnet(g->states, g->actions, g->seed,
                               cfg.gamma.value_or(MethodParams::kDefaultGamma));
    }
    TabularMdp mdp = load_mdp(std::get<std::filesystem::path>(cfg.mdp_source));
    return cfg.gamma ? mdp.with_gamma(*cfg.gamma) : mdp;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("percentile level must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
    std::vector<std::pair<std::string, std::size_t>> keys;
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& row : rows) {
        auto key = std::make_pair(row.method, row.n);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            keys.push_back(key);
        }
        it->second.push_back(row.gap);
    }
    std::vector<AggregateRow> out;
    out.reserve(keys.size());
    for (const auto& key : keys) {
        const auto& gaps = groups.at(key);
        double total = 0.0;
        for (double g : gaps) {
            total += g;
        }
        out.push_back(AggregateRow{key.first, key.second, total / static_cast<double>(gaps.size()),
                                   percentile(gaps, 0.05), percentile(gaps, 0.95)});
    }
    return out;
}

ExperimentResult run_sweep(const ExperimentConfig& cfg, unsigned jobs) {
    cfg.validate();
    const TabularMdp mdp = resolve_mdp(cfg);
    const Solution optimal = exact_value_iteration(mdp, cfg.tol / 10.0);
    const double optimal_value = scalar_value(optimal.value, mdp.initial_distribution());

    ExperimentResult result;
    std::optional<BehaviorDistribution> mu;
    if (cfg.coverage == Coverage::Uniform) {
        mu = behavior_uniform(mdp.num_states(), mdp.num_actions());
    } else {
        const std::size_t eta = cfg.eta.value_or(
            draw_partial_action(mdp.num_actions(), hash_words({cfg.base_seed, kEtaStream})));
        if (eta >= mdp.num_actions()) {
            throw std::invalid_argument("config: 'eta' is not a valid action");
        }
        result.eta = eta;
        mu = behavior_partial(optimal.policy, mdp.num_actions(), eta);
    }

    MethodParams params;
    params.delta = cfg.delta;
    params.gamma = mdp.gamma();
    params.tol = cfg.tol;
    params.lcb_bonus_scale = cfg.lcb_bonus_scale;

    const std::size_t num_cells = cfg.sizes.size() * cfg.seeds.size();
    const std::size_t num_methods = cfg.methods.size();
    // cell-major: rows[cell * num_methods + m]
    std::vector<ResultRow> cell_rows(num_cells * num_methods);
    std::vector<std::string> errors(num_cells);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t n = cfg.sizes[cell / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[cell % cfg.seeds.size()];
        std::string stage = "sampling";
        try {
            const OfflineDataset data =
                sample_dataset(mdp, *mu, n, hash_words({cfg.base_seed, n, seed}));
            for (std::size_t m = 0; m < num_methods; ++m) {
                const Method method = cfg.methods[m];
                stage = "method " + method_name(method);
                const auto start = std::chrono::steady_clock::now();
                const SolutionRecord record = solve_dataset(data, method, params);
                const auto stop = std::chrono::steady_clock::now();
                const ValueFunction achieved = policy_evaluation(mdp, record.solution.policy);
                ResultRow& row = cell_rows[cell * num_methods + m];
                row.method = method_name(method);
                row.n = n;
                row.seed = seed;
                row.gap = optimal_value - scalar_value(achieved, mdp.initial_distribution());
                row.runtime_ms =
                    cfg.record_runtime
                        ? std::chrono::duration<double, std::milli>(stop - start).count()
                        : 0.0;
                row.iterations = record.solution.iterations;
            }
        } catch (const std::exception& e) {
            errors[cell] = stage + ", N=" + std::to_string(n) + ", seed=" + std::to_string(seed) +
                           ": " + e.what();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(num_cells)));
    if (workers == 1) {
        for (std::size_t cell = 0; cell < num_cells; ++cell) {
            run_cell(cell);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t cell = next++; cell < num_cells; cell = next++) {
                    run_cell(cell);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& err : errors) {
        if (!err.empty()) {
            throw SolverError(err);
        }
    }

    // method, then N, then seed (each in config order)
    result.rows.reserve(cell_rows.size());
    for (std::size_t m = 0; m < num_methods; ++m) {
        for (std::size_t cell = 0; cell < num_cells; ++cell) {
            result.rows.push_back(cell_rows[cell * num_methods + m]);
        }
    }
    result.aggregates = aggregate(result.rows);
    return result;
}

void emit_tables(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const auto raw_path = dir / "raw.csv";
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) {
        throw IoError("cannot open " + raw_path.string() + " for writing");
    }
    raw << "method,N,seed,gap,runtime_ms,iterations\n";
    for (const auto& r : result.rows) {
        raw << r.method << ',' << r.n << ',' << r.seed << ',' << format_double(r.gap) << ','
            << format_double(r.runtime_ms) << ',' << r.iterations << '\n';
    }
    if (!raw) {
        throw IoError("failed writing " + raw_path.string());
    }

    const auto agg_path = dir / "agg.csv";
    std::ofstream agg(agg_path, std::ios::binary);
    if (!agg) {
        throw IoError("cannot open " + agg_path.string() + " for writing");
    }
    agg << "method,N,mean,p5,p95\n";
    for (const auto& a : result.aggregates) {
        agg << a.method << ',' << a.n << ',' << format_double(a.mean) << ',' << format_double(a.p5)
            << ',' << format_double(a.p95) << '\n';
    }
    if (!agg) {
        throw IoError("failed writing " + agg_path.string());
    }
}

ExperimentResult load_tables(const std::filesystem::path& dir) {
    ExperimentResult result;
    const auto raw_lines = read_lines(dir / "raw.csv");
    for (std::size_t i = 1; i < raw_lines.size(); ++i) {
        const auto f = split_csv(raw_lines[i]);
        const std::string where = (dir / "raw.csv").string() + ":" + std::to_string(i + 1);
        if (f.size() != 6) {
            throw std::invalid_argument(where + ": expected 6 fields");
        }
        result.rows.push_back(ResultRow{f[0], parse_field<std::size_t>(f[1], where),
                                        parse_field<std::uint64_t>(f[2], where),
                                        parse_field<double>(f[3], where),
                                        parse_field<double>(f[4], where),
                                        parse_field<std::size_t>(f[5], where)});
    }
    const auto agg_lines = read_lines(dir / "agg.csv");
    for (std::size_t i = 1; i < agg_lines.size(); ++i) {
        const auto f = split_csv(agg_lines[i]);
        const std::string where = (dir / "agg.csv").string() + ":" + std::to_string(i + 1);
        if (f.size() != 5) {
            throw std::invalid_argument(where + ": expected 5 fields");
        }
        result.aggregates.push_back(AggregateRow{f[0], parse_field<std::size_t>(f[1], where),
                                                 parse_field<double>(f[2], where),
                                                 parse_field<double>(f[3], where),
                                                 parse_field<double>(f[4], where)});
    }
    return result;
}

}  // namespace drorl
