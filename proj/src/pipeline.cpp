#include "randsig/pipeline.hpp"

#include "randsig/errors.hpp"
#include "randsig/tsig.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace randsig::pipeline {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(SystemKind kind)
{
    switch (kind) {
    case SystemKind::fou: return "fou";
    case SystemKind::langevin: return "langevin";
    case SystemKind::enzyme: return "enzyme";
    }
    return "unknown";
}

SystemKind system_from_string(const std::string& name)
{
    if (name == "fou") return SystemKind::fou;
    if (name == "langevin") return SystemKind::langevin;
    if (name == "enzyme") return SystemKind::enzyme;
    throw InvalidArgument("unknown system '" + name + "'");
}

std::string to_string(ControlLaw law)
{
    return law == ControlLaw::squared_brownian ? "squared_brownian" : "threshold_step";
}

ControlLaw control_law_from_string(const std::string& name)
{
    if (name == "squared_brownian") return ControlLaw::squared_brownian;
    if (name == "threshold_step") return ControlLaw::threshold_step;
    throw InvalidArgument("unknown control law '" + name + "'");
}

std::string to_string(FeatureKind kind)
{
    switch (kind) {
    case FeatureKind::rsig: return "rsig";
    case FeatureKind::esn: return "esn";
    case FeatureKind::tsig: return "tsig";
    }
    return "unknown";
}

FeatureKind feature_from_string(const std::string& name)
{
    if (name == "rsig") return FeatureKind::rsig;
    if (name == "esn") return FeatureKind::esn;
    if (name == "tsig") return FeatureKind::tsig;
    throw InvalidArgument("unknown feature kind '" + name + "'");
}

void GridConfig::validate() const
{
    require(horizon > 0.0 && std::isfinite(horizon), "GridConfig: horizon must be positive");
    require(points >= (irregular ? 3 : 2), "GridConfig: too few points");
}

SampleGenerator::SampleGenerator(SystemConfig system, GridConfig grid)
    : system_(std::move(system)), grid_(grid)
{
    grid_.validate();
    if (system_.kind == SystemKind::fou) {
        system_.fou.validate();
        if (!grid_.irregular) fbm_.emplace(paths::regular_grid(grid_.horizon, grid_.points - 1), system_.hurst);
    }
}

int SampleGenerator::control_dim() const
{
    return system_.kind == SystemKind::fou ? system_.fou.dim() + 1 : 2;
}

int SampleGenerator::target_dim() const
{
    return system_.kind == SystemKind::fou ? system_.fou.dim() : 1;
}

paths::TimeGrid SampleGenerator::draw_grid(CounterRng& rng) const
{
    if (!grid_.irregular) return paths::regular_grid(grid_.horizon, grid_.points - 1);
    auto unit = paths::irregular_grid(grid_.points, rng);
    if (grid_.horizon == 1.0) return unit;
    std::vector<double> times(unit.times().begin(), unit.times().end());
    for (auto& t : times) t *= grid_.horizon;
    return paths::TimeGrid(std::move(times));
}

Sample SampleGenerator::operator()(CounterRng& rng) const { return (*this)(rng, system_.enzyme_control); }

Sample SampleGenerator::operator()(CounterRng& rng, ControlLaw law) const
{
    CounterRng grid_rng = rng.split(0);
    CounterRng noise_rng = rng.split(1);
    switch (system_.kind) {
    case SystemKind::fou: {
        const paths::FbmSpec spec{system_.hurst, system_.fou.dim(), true};
        paths::Path noise = fbm_ ? fbm_->sample(spec, noise_rng)
                                 : paths::sample_fbm(draw_grid(grid_rng), spec, noise_rng);
        auto target = dynamics::simulate_fou(system_.fou, noise);
        return {paths::time_augment(noise), std::move(target)};
    }
    case SystemKind::langevin: {
        auto noise = paths::sample_brownian(draw_grid(grid_rng), 1, noise_rng);
        auto target = dynamics::simulate_langevin(system_.langevin, noise, system_.langevin_max_step);
        return {paths::time_augment(noise), std::move(target)};
    }
    case SystemKind::enzyme: {
        auto w = paths::sample_brownian(draw_grid(grid_rng), 1, noise_rng);
        auto x = paths::transform_path(w, paths::Square{});
        if (law == ControlLaw::threshold_step) x = paths::transform_path(x, system_.threshold);
        auto target = dynamics::simulate_enzyme(system_.enzyme, x, system_.enzyme_options);
        return {paths::time_augment(x), std::move(target)};
    }
    }
    throw InvalidArgument("SampleGenerator: unknown system");
}

FeatureMap FeatureMap::build(const FeatureConfig& config, int control_dim, std::uint64_t seed)
{
    switch (config.kind) {
    case FeatureKind::rsig: {
        const auto activation = config.activation.value_or(rsig::default_activation(config.k, control_dim));
        return FeatureMap(rsig::init_reservoir(config.k, control_dim, activation, seed));
    }
    case FeatureKind::esn: {
        auto params = config.esn;
        params.seed = seed;
        return FeatureMap(esn::init_esn(params, control_dim));
    }
    case FeatureKind::tsig:
        require(config.tsig_order >= 1 && config.tsig_order <= tsig::kMaxOrder, "FeatureMap: bad tsig order");
        return FeatureMap(Tsig{control_dim, config.tsig_order});
    }
    throw InvalidArgument("FeatureMap: unknown kind");
}

paths::Path FeatureMap::operator()(const paths::Path& control) const
{
    if (const auto* r = std::get_if<rsig::Reservoir>(&impl_)) return rsig::evolve(*r, control);
    if (const auto* e = std::get_if<esn::Esn>(&impl_)) return esn::evolve_esn(*e, control);
    const auto& t = std::get<Tsig>(impl_);
    require(control.dim() == t.dim, "FeatureMap: control dimension mismatch");
    Matrix sig = tsig::signature_features(control, t.order);
    Matrix out(sig.rows(), sig.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(sig.cols()) = sig;
    return paths::Path(control.grid(), std::move(out));
}

Eigen::Index FeatureMap::dim() const
{
    if (const auto* r = std::get_if<rsig::Reservoir>(&impl_)) return r->k;
    if (const auto* e = std::get_if<esn::Esn>(&impl_)) return e->params.size;
    const auto& t = std::get<Tsig>(impl_);
    return static_cast<Eigen::Index>(tsig::flattened_size(t.dim, t.order)) + 1;
}

int FeatureMap::washout() const
{
    if (const auto* e = std::get_if<esn::Esn>(&impl_)) return e->params.washout;
    return 0;
}

std::string FeatureMap::describe() const
{
    std::ostringstream out;
    if (const auto* r = std::get_if<rsig::Reservoir>(&impl_)) {
        out << "rsig k=" << r->k << " d=" << r->d << " seed=" << r->seed
            << " activation=" << rsig::to_string(r->activation.kind) << " slope=" << std::hexfloat
            << r->activation.slope;
    } else if (const auto* e = std::get_if<esn::Esn>(&impl_)) {
        out << "esn size=" << e->params.size << " input_dim=" << e->input_dim << " seed=" << e->params.seed
            << " radius=" << std::hexfloat << e->params.spectral_radius << " leak=" << e->params.leak_rate
            << " input_scaling=" << e->params.input_scaling << std::defaultfloat
            << " washout=" << e->params.washout;
    } else {
        const auto& t = std::get<Tsig>(impl_);
        out << "tsig d=" << t.dim << " order=" << t.order;
    }
    return out.str();
}

Dataset make_dataset(const PipelineConfig& config)
{
    require(config.n_train >= 1 && config.n_test >= 0, "make_dataset: need n_train >= 1 and n_test >= 0");
    require(config.observation_noise >= 0.0, "make_dataset: observation noise must be >= 0");
    const SampleGenerator generate(config.system, config.grid);
    const CounterRng root(config.data_seed);
    const CounterRng train_root = root.split(0);
    const CounterRng test_root = root.split(1);
    const CounterRng noise_root = root.split(2);

    Dataset data;
    data.train.reserve(static_cast<std::size_t>(config.n_train));
    for (int i = 0; i < config.n_train; ++i) {
        auto rng = train_root.split(static_cast<std::uint64_t>(i));
        Sample s = generate(rng);
        if (config.observation_noise > 0.0) {
            auto noise_rng = noise_root.split(static_cast<std::uint64_t>(i));
            s.target = dynamics::add_observation_noise(s.target, config.observation_noise, noise_rng);
        }
        data.train.push_back(std::move(s));
    }
    data.test.reserve(static_cast<std::size_t>(config.n_test));
    for (int i = 0; i < config.n_test; ++i) {
        auto rng = test_root.split(static_cast<std::uint64_t>(i));
        data.test.push_back(generate(rng));
    }
    return data;
}

readout::ReadoutModel fit_readout(const FeatureMap& features, std::span<const Sample> train, double lambda)
{
    require(!train.empty(), "fit_readout: empty training set");
    const auto k = features.dim();
    const auto m = train.front().target.dim();
    const auto skip = static_cast<Eigen::Index>(features.washout());
    std::size_t total_rows = 0;
    for (const auto& s : train) total_rows += s.target.size() - std::min<std::size_t>(s.target.size(), skip);

    if (static_cast<Eigen::Index>(total_rows) >= k) {
        readout::NormalEquations normal(k, m);
        for (const auto& s : train) {
            const auto z = features(s.control);
            require(z.size() == s.target.size(), "fit_readout: feature/target length mismatch");
            const auto rows = static_cast<Eigen::Index>(z.size()) - skip;
            if (rows <= 0) continue;
            normal.add(z.values().bottomRows(rows), s.target.values().bottomRows(rows));
        }
        return normal.solve(lambda);
    }

    Matrix z(static_cast<Eigen::Index>(total_rows), k);
    Matrix y(static_cast<Eigen::Index>(total_rows), m);
    Eigen::Index offset = 0;
    for (const auto& s : train) {
        const auto f = features(s.control);
        const auto rows = static_cast<Eigen::Index>(f.size()) - skip;
        if (rows <= 0) continue;
        z.middleRows(offset, rows) = f.values().bottomRows(rows);
        y.middleRows(offset, rows) = s.target.values().bottomRows(rows);
        offset += rows;
    }
    return readout::ridge_fit(z, y, lambda);
}

void evaluate(PipelineResult& result, std::span<const Sample> test)
{
    result.test_errors.clear();
    double err_sq = 0.0;
    double ref_sq = 0.0;
    for (const auto& s : test) {
        const auto pred = readout::predict(result.model, result.features(s.control));
        result.test_errors.push_back(readout::relative_l2(pred, s.target));
        err_sq += (pred.values() - s.target.values()).squaredNorm();
        ref_sq += s.target.values().squaredNorm();
    }
    result.error = readout::mean_std(result.test_errors);
    result.pooled_error = ref_sq > 0.0 ? std::sqrt(err_sq / ref_sq) : 0.0;
}

PipelineResult train_on(const PipelineConfig& config, const Dataset& data)
{
    require(!data.train.empty(), "train_on: empty training set");
    const int d = static_cast<int>(data.train.front().control.dim());
    auto start = std::chrono::steady_clock::now();
    PipelineResult result{FeatureMap::build(config.features, d, config.feature_seed), {}, {}, {}, 0.0, 0.0, 0.0};
    result.feature_seconds = seconds_since(start);
    start = std::chrono::steady_clock::now();
    result.model = fit_readout(result.features, data.train, config.lambda);
    result.fit_seconds = seconds_since(start);
    evaluate(result, data.test);
    return result;
}

PipelineResult train_pipeline(const PipelineConfig& config) { return train_on(config, make_dataset(config)); }

KSearch select_k(const PipelineConfig& config, std::span<const int> candidates, double train_fraction)
{
    require(!candidates.empty(), "select_k: no candidates");
    require(train_fraction > 0.0 && train_fraction < 1.0, "select_k: train fraction must lie in (0, 1)");
    auto no_test = config;
    no_test.n_test = 0;
    const Dataset data = make_dataset(no_test);
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(data.train.size())));
    require(cut >= 1 && cut < data.train.size(), "select_k: split leaves an empty side");
    const std::span<const Sample> all(data.train);
    const auto train = all.first(cut);
    const auto validation = all.subspan(cut);

    KSearch out;
    double best = std::numeric_limits<double>::infinity();
    for (int k : candidates) {
        auto features_cfg = config.features;
        features_cfg.k = k;
        const int d = static_cast<int>(train.front().control.dim());
        PipelineResult r{FeatureMap::build(features_cfg, d, config.feature_seed), {}, {}, {}, 0.0, 0.0, 0.0};
        r.model = fit_readout(r.features, train, config.lambda);
        evaluate(r, validation);
        out.validation_error.emplace_back(k, r.error.mean);
        if (r.error.mean < best) {
            best = r.error.mean;
            out.best_k = k;
        }
    }
    return out;
}

}  // namespace randsig::pipeline
