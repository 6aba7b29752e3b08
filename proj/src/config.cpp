#include "randsig/config.hpp"

#include "randsig/csv.hpp"
#include "randsig/errors.hpp"
#include "randsig/tsig.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace randsig::config {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t");
    return std::string(text.substr(first, last - first + 1));
}

template <class T>
T parse_integer(const std::string& text, const std::string& key)
{
    try {
        std::size_t used = 0;
        const long long value = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        if constexpr (std::is_unsigned_v<T>) {
            if (value < 0) throw std::invalid_argument(text);
        }
        return static_cast<T>(value);
    } catch (const std::exception&) {
        throw InvalidArgument("config: '" + key + "' expects an integer, got '" + text + "'");
    }
}

double parse_double(const std::string& text, const std::string& key)
{
    try {
        return csv::parse(text);
    } catch (const std::exception&) {
        throw InvalidArgument("config: '" + key + "' expects a number, got '" + text + "'");
    }
}

bool parse_bool(const std::string& text, const std::string& key)
{
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InvalidArgument("config: '" + key + "' expects true or false, got '" + text + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key)
{
    std::vector<T> out;
    for (auto item : csv::split(text)) {
        const auto value = trim(item);
        if (value.empty()) continue;
        out.push_back(parse_integer<T>(value, key));
    }
    return out;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text, const std::string& key)
{
    std::vector<std::pair<int, int>> out;
    for (auto item : csv::split(text)) {
        const auto value = trim(item);
        if (value.empty()) continue;
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw InvalidArgument("config: '" + key + "' expects points:k pairs");
        out.emplace_back(parse_integer<int>(trim(std::string_view(value).substr(0, colon)), key),
                         parse_integer<int>(trim(std::string_view(value).substr(colon + 1)), key));
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string join_pairs(const std::vector<std::pair<int, int>>& pairs)
{
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(pairs[i].first) + ":" + std::to_string(pairs[i].second);
    }
    return out;
}

std::vector<int> range(int first, int last, int step = 1)
{
    std::vector<int> out;
    for (int k = first; k <= last; k += step) out.push_back(k);
    return out;
}

void apply_fou(ExperimentConfig& c)
{
    c.pipeline.system.fou = c.fou_preset == FouPreset::scalar ? dynamics::FouParams::scalar_preset()
                                                              : dynamics::FouParams::ratio_preset(c.fou_dim);
}

/// Calls `fn(value)` when `section.key` is present.
template <class Fn>
void read_key(const pt::ptree& tree, const std::string& section, const std::string& key, Fn fn)
{
    const auto child = tree.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (child) fn(trim(child->get_value<std::string>()), section + "." + key);
}

}  // namespace

std::string to_string(Preset preset)
{
    switch (preset) {
    case Preset::robustness: return "robustness";
    case Preset::compression: return "compression";
    case Preset::rsig_vs_tsig: return "rsig_vs_tsig";
    case Preset::baseline_compare: return "baseline_compare";
    case Preset::enzyme_ood: return "enzyme_ood";
    case Preset::irregular_grid: return "irregular_grid";
    case Preset::custom: return "custom";
    }
    return "unknown";
}

Preset preset_from_string(const std::string& name)
{
    for (Preset p : all_presets())
        if (to_string(p) == name) return p;
    throw InvalidArgument("unknown preset '" + name + "'");
}

const std::vector<Preset>& all_presets()
{
    static const std::vector<Preset> presets{Preset::robustness,       Preset::compression, Preset::rsig_vs_tsig,
                                             Preset::baseline_compare, Preset::enzyme_ood,  Preset::irregular_grid,
                                             Preset::custom};
    return presets;
}

void ExperimentConfig::validate() const
{
    require(!seeds.empty(), "ExperimentConfig: seeds must not be empty");
    pipeline.grid.validate();
    require(pipeline.lambda >= 0.0, "ExperimentConfig: lambda must be >= 0");
    require(pipeline.n_train >= 1 && pipeline.n_test >= 0, "ExperimentConfig: bad train/test sizes");
    require(pipeline.observation_noise >= 0.0, "ExperimentConfig: observation noise must be >= 0");
    require(pipeline.features.k >= 1, "ExperimentConfig: k must be positive");
    require(sample_trajectories >= 0, "ExperimentConfig: sample_trajectories must be >= 0");
    if (pipeline.features.activation) pipeline.features.activation->validate();
    pipeline.features.esn.validate();
    pipeline.system.fou.validate();
    pipeline.system.langevin.validate();
    pipeline.system.enzyme.validate();
    require(pipeline.system.langevin_max_step >= 0.0, "ExperimentConfig: langevin max_step must be >= 0");
    require(pipeline.system.hurst > 0.0 && pipeline.system.hurst < 1.0, "ExperimentConfig: hurst must lie in (0, 1)");
    switch (preset) {
    case Preset::compression:
        require(compression.dim >= 2, "compression: dim must be >= 2 (time plus noise)");
        require(compression.order >= 1 && compression.order <= tsig::kMaxOrder, "compression: bad order");
        require(compression.steps >= 1, "compression: steps must be positive");
        require(!compression.ks.empty(), "compression: ks must not be empty");
        for (int k : compression.ks) require(k >= 1, "compression: every k must be positive");
        break;
    case Preset::rsig_vs_tsig:
        require(!rsig_vs_tsig.m_values.empty() && !rsig_vs_tsig.n_train_values.empty(),
                "rsig_vs_tsig: m_values and n_train_values must not be empty");
        for (int m : rsig_vs_tsig.m_values) require(m >= 1, "rsig_vs_tsig: m must be positive");
        for (int n : rsig_vs_tsig.n_train_values) require(n >= 1, "rsig_vs_tsig: n_train must be positive");
        break;
    case Preset::irregular_grid:
        require(!grid_pairs.empty(), "irregular_grid: grid_pairs must not be empty");
        for (auto [points, k] : grid_pairs) require(points >= 3 && k >= 1, "irregular_grid: bad (points, k) pair");
        break;
    default: break;
    }
}

ExperimentConfig preset_defaults(Preset preset, bool full_scale)
{
    ExperimentConfig c;
    c.preset = preset;
    c.full_scale = full_scale;
    c.out_dir = "out/" + to_string(preset);
    auto& p = c.pipeline;
    switch (preset) {
    case Preset::robustness:
        p.system.kind = pipeline::SystemKind::fou;
        p.system.hurst = 0.2;
        p.grid.points = 101;
        p.features.k = 100;
        p.n_train = 100;
        p.n_test = 100;
        p.observation_noise = 0.01;
        c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        break;
    case Preset::compression:
        p.lambda = 0.0;
        c.seeds = {1, 2, 3, 4, 5};
        if (full_scale) {
            c.compression.dim = 10;
            c.compression.order = 6;
            c.compression.ks = range(1, 200);
        } else {
            c.compression.ks = range(1, 120);
            for (int k : {150, 200, 300, 400, 500, 600, 700, 780}) c.compression.ks.push_back(k);
        }
        break;
    case Preset::rsig_vs_tsig:
        p.system.kind = pipeline::SystemKind::fou;
        p.system.hurst = 0.3;
        c.fou_preset = FouPreset::ratio;
        p.n_test = 100;
        if (full_scale) c.rsig_vs_tsig.m_values = {20, 40, 60, 80};
        break;
    case Preset::baseline_compare:
        p.system.kind = pipeline::SystemKind::fou;
        p.system.hurst = 0.1;
        p.features.k = 50;
        p.n_train = 1000;
        p.n_test = 1000;
        break;
    case Preset::enzyme_ood:
        p.system.kind = pipeline::SystemKind::enzyme;
        p.features.k = 222;
        p.n_train = full_scale ? 100000 : 10000;
        p.n_test = 1000;
        break;
    case Preset::irregular_grid:
        p.system.kind = pipeline::SystemKind::langevin;
        p.system.langevin_max_step = 0.01;
        p.n_train = 10000;
        p.n_test = full_scale ? 10000 : 1000;
        c.grid_pairs = {{11, 111}, {101, 222}};
        if (full_scale) c.grid_pairs.emplace_back(1001, 332);
        break;
    case Preset::custom: break;
    }
    apply_fou(c);
    return c;
}

std::string preset_name(std::istream& in)
{
    pt::ptree tree;
    pt::ini_parser::read_ini(in, tree);
    return tree.get<std::string>("experiment.preset", "");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig c)
{
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    static const std::vector<std::string> sections{"experiment", "system", "grid", "reservoir", "readout", "output"};
    for (const auto& [name, _] : tree)
        if (std::find(sections.begin(), sections.end(), name) == sections.end())
            throw InvalidArgument("config: unknown section [" + name + "]");

    auto& p = c.pipeline;
    bool fou_changed = false;
    std::set<std::string> known;
    const auto with = [&](const pt::ptree& t, const std::string& section, const std::string& key, auto fn) {
        known.insert(section + "." + key);
        read_key(t, section, key, fn);
    };

    with(tree, "experiment", "preset", [&](auto v, auto) { c.preset = preset_from_string(v); });
    with(tree, "experiment", "seeds", [&](auto v, auto k) { c.seeds = parse_list<std::uint64_t>(v, k); });
    with(tree, "experiment", "data_seed", [&](auto v, auto k) { p.data_seed = parse_integer<std::uint64_t>(v, k); });
    with(tree, "experiment", "full_scale", [&](auto v, auto k) { c.full_scale = parse_bool(v, k); });
    with(tree, "experiment", "ks", [&](auto v, auto k) { c.compression.ks = parse_list<int>(v, k); });
    with(tree, "experiment", "compression_dim", [&](auto v, auto k) { c.compression.dim = parse_integer<int>(v, k); });
    with(tree, "experiment", "compression_order",
         [&](auto v, auto k) { c.compression.order = parse_integer<int>(v, k); });
    with(tree, "experiment", "compression_steps",
         [&](auto v, auto k) { c.compression.steps = parse_integer<int>(v, k); });
    with(tree, "experiment", "compression_target",
         [&](auto v, auto k) { c.compression.target_error = parse_double(v, k); });
    with(tree, "experiment", "m_values", [&](auto v, auto k) { c.rsig_vs_tsig.m_values = parse_list<int>(v, k); });
    with(tree, "experiment", "n_train_values",
         [&](auto v, auto k) { c.rsig_vs_tsig.n_train_values = parse_list<int>(v, k); });
    with(tree, "experiment", "grid_pairs", [&](auto v, auto k) { c.grid_pairs = parse_pairs(v, k); });

    with(tree, "system", "kind", [&](auto v, auto) { p.system.kind = pipeline::system_from_string(v); });
    with(tree, "system", "hurst", [&](auto v, auto k) { p.system.hurst = parse_double(v, k); });
    with(tree, "system", "fou_preset", [&](auto v, auto k) {
        if (v == "scalar") c.fou_preset = FouPreset::scalar;
        else if (v == "ratio") c.fou_preset = FouPreset::ratio;
        else throw InvalidArgument("config: '" + k + "' expects scalar or ratio");
        fou_changed = true;
    });
    with(tree, "system", "fou_dim", [&](auto v, auto k) {
        c.fou_dim = parse_integer<int>(v, k);
        fou_changed = true;
    });
    with(tree, "system", "langevin_mu", [&](auto v, auto k) { p.system.langevin.mu = parse_double(v, k); });
    with(tree, "system", "langevin_theta", [&](auto v, auto k) { p.system.langevin.theta = parse_double(v, k); });
    with(tree, "system", "langevin_sigma", [&](auto v, auto k) { p.system.langevin.sigma = parse_double(v, k); });
    with(tree, "system", "langevin_y0", [&](auto v, auto k) { p.system.langevin.y0 = parse_double(v, k); });
    with(tree, "system", "langevin_max_step",
         [&](auto v, auto k) { p.system.langevin_max_step = parse_double(v, k); });
    with(tree, "system", "enzyme_k1", [&](auto v, auto k) { p.system.enzyme.k1 = parse_double(v, k); });
    with(tree, "system", "enzyme_k_neg1", [&](auto v, auto k) { p.system.enzyme.k_neg1 = parse_double(v, k); });
    with(tree, "system", "enzyme_k2", [&](auto v, auto k) { p.system.enzyme.k2 = parse_double(v, k); });
    with(tree, "system", "enzyme_substeps",
         [&](auto v, auto k) { p.system.enzyme_options.substeps = parse_integer<int>(v, k); });
    with(tree, "system", "enzyme_control",
         [&](auto v, auto) { p.system.enzyme_control = pipeline::control_law_from_string(v); });
    with(tree, "system", "threshold_level", [&](auto v, auto k) { p.system.threshold.level = parse_double(v, k); });
    with(tree, "system", "threshold_scale", [&](auto v, auto k) { p.system.threshold.scale = parse_double(v, k); });
    with(tree, "system", "observation_noise", [&](auto v, auto k) { p.observation_noise = parse_double(v, k); });

    with(tree, "grid", "irregular", [&](auto v, auto k) { p.grid.irregular = parse_bool(v, k); });
    with(tree, "grid", "horizon", [&](auto v, auto k) { p.grid.horizon = parse_double(v, k); });
    with(tree, "grid", "points", [&](auto v, auto k) { p.grid.points = parse_integer<int>(v, k); });

    with(tree, "reservoir", "kind", [&](auto v, auto) { p.features.kind = pipeline::feature_from_string(v); });
    with(tree, "reservoir", "k", [&](auto v, auto k) { p.features.k = parse_integer<int>(v, k); });
    with(tree, "reservoir", "activation", [&](auto v, auto) {
        if (v == "default") p.features.activation.reset();
        else p.features.activation = rsig::Activation{rsig::activation_from_string(v), 1.0};
    });
    with(tree, "reservoir", "slope", [&](auto v, auto k) {
        if (!p.features.activation) throw InvalidArgument("config: '" + k + "' needs an explicit activation");
        p.features.activation->slope = parse_double(v, k);
    });
    with(tree, "reservoir", "tsig_order", [&](auto v, auto k) { p.features.tsig_order = parse_integer<int>(v, k); });
    with(tree, "reservoir", "esn_size", [&](auto v, auto k) { p.features.esn.size = parse_integer<int>(v, k); });
    with(tree, "reservoir", "esn_radius", [&](auto v, auto k) { p.features.esn.spectral_radius = parse_double(v, k); });
    with(tree, "reservoir", "esn_leak", [&](auto v, auto k) { p.features.esn.leak_rate = parse_double(v, k); });
    with(tree, "reservoir", "esn_input_scaling",
         [&](auto v, auto k) { p.features.esn.input_scaling = parse_double(v, k); });
    with(tree, "reservoir", "esn_washout", [&](auto v, auto k) { p.features.esn.washout = parse_integer<int>(v, k); });

    with(tree, "readout", "lambda", [&](auto v, auto k) { p.lambda = parse_double(v, k); });
    with(tree, "readout", "n_train", [&](auto v, auto k) { p.n_train = parse_integer<int>(v, k); });
    with(tree, "readout", "n_test", [&](auto v, auto k) { p.n_test = parse_integer<int>(v, k); });

    with(tree, "output", "dir", [&](auto v, auto) { c.out_dir = v; });
    with(tree, "output", "memory_budget",
         [&](auto v, auto k) { c.compression.memory_budget = parse_integer<std::uint64_t>(v, k); });
    with(tree, "output", "sample_trajectories",
         [&](auto v, auto k) { c.sample_trajectories = parse_integer<int>(v, k); });

    for (const auto& [section, keys] : tree)
        for (const auto& [key, _] : keys)
            if (!known.count(section + "." + key))
                throw InvalidArgument("config: unknown key '" + key + "' in [" + section + "]");

    if (fou_changed) apply_fou(c);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& file, ExperimentConfig base)
{
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot open config file '" + file + "'");
    return parse_config(in, std::move(base));
}

void write_config(const ExperimentConfig& c, std::ostream& out)
{
    const auto& p = c.pipeline;
    const auto num = [](double v) { return csv::format(v); };
    out << "[experiment]\n"
        << "preset = " << to_string(c.preset) << "\n"
        << "seeds = " << join(c.seeds) << "\n"
        << "data_seed = " << p.data_seed << "\n"
        << "full_scale = " << (c.full_scale ? "true" : "false") << "\n"
        << "ks = " << join(c.compression.ks) << "\n"
        << "compression_dim = " << c.compression.dim << "\n"
        << "compression_order = " << c.compression.order << "\n"
        << "compression_steps = " << c.compression.steps << "\n"
        << "compression_target = " << num(c.compression.target_error) << "\n"
        << "m_values = " << join(c.rsig_vs_tsig.m_values) << "\n"
        << "n_train_values = " << join(c.rsig_vs_tsig.n_train_values) << "\n"
        << "grid_pairs = " << join_pairs(c.grid_pairs) << "\n\n";
    out << "[system]\n"
        << "kind = " << pipeline::to_string(p.system.kind) << "\n"
        << "hurst = " << num(p.system.hurst) << "\n"
        << "fou_preset = " << (c.fou_preset == FouPreset::scalar ? "scalar" : "ratio") << "\n"
        << "fou_dim = " << c.fou_dim << "\n"
        << "langevin_mu = " << num(p.system.langevin.mu) << "\n"
        << "langevin_theta = " << num(p.system.langevin.theta) << "\n"
        << "langevin_sigma = " << num(p.system.langevin.sigma) << "\n"
        << "langevin_y0 = " << num(p.system.langevin.y0) << "\n"
        << "langevin_max_step = " << num(p.system.langevin_max_step) << "\n"
        << "enzyme_k1 = " << num(p.system.enzyme.k1) << "\n"
        << "enzyme_k_neg1 = " << num(p.system.enzyme.k_neg1) << "\n"
        << "enzyme_k2 = " << num(p.system.enzyme.k2) << "\n"
        << "enzyme_substeps = " << p.system.enzyme_options.substeps << "\n"
        << "enzyme_control = " << pipeline::to_string(p.system.enzyme_control) << "\n"
        << "threshold_level = " << num(p.system.threshold.level) << "\n"
        << "threshold_scale = " << num(p.system.threshold.scale) << "\n"
        << "observation_noise = " << num(p.observation_noise) << "\n\n";
    out << "[grid]\n"
        << "irregular = " << (p.grid.irregular ? "true" : "false") << "\n"
        << "horizon = " << num(p.grid.horizon) << "\n"
        << "points = " << p.grid.points << "\n\n";
    out << "[reservoir]\n"
        << "kind = " << pipeline::to_string(p.features.kind) << "\n"
        << "k = " << p.features.k << "\n";
    if (p.features.activation)
        out << "activation = " << rsig::to_string(p.features.activation->kind) << "\n"
            << "slope = " << num(p.features.activation->slope) << "\n";
    else
        out << "activation = default\n";
    out << "tsig_order = " << p.features.tsig_order << "\n"
        << "esn_size = " << p.features.esn.size << "\n"
        << "esn_radius = " << num(p.features.esn.spectral_radius) << "\n"
        << "esn_leak = " << num(p.features.esn.leak_rate) << "\n"
        << "esn_input_scaling = " << num(p.features.esn.input_scaling) << "\n"
        << "esn_washout = " << p.features.esn.washout << "\n\n";
    out << "[readout]\n"
        << "lambda = " << num(p.lambda) << "\n"
        << "n_train = " << p.n_train << "\n"
        << "n_test = " << p.n_test << "\n\n";
    out << "[output]\n"
        << "dir = " << c.out_dir << "\n"
        << "memory_budget = " << c.compression.memory_budget << "\n"
        << "sample_trajectories = " << c.sample_trajectories << "\n";
}

}  // namespace randsig::config
