#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "randsig/config.hpp"
#include "randsig/errors.hpp"
#include "randsig/experiments.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace randsig;
using namespace randsig::config;
using namespace randsig::experiments;

namespace {

std::string text_of(const ExperimentConfig& c)
{
    std::ostringstream out;
    write_config(c, out);
    return out.str();
}

ExperimentConfig parse(const std::string& text, ExperimentConfig base = {})
{
    std::istringstream in(text);
    return parse_config(in, std::move(base));
}

ExperimentConfig small_robustness(std::vector<std::uint64_t> seeds)
{
    auto c = preset_defaults(Preset::robustness);
    c.pipeline.n_train = 30;
    c.pipeline.n_test = 4;
    c.pipeline.grid.points = 51;
    c.seeds = std::move(seeds);
    return c;
}

}  // namespace

TEST_CASE("preset names")
{
    for (Preset p : all_presets()) CHECK(preset_from_string(to_string(p)) == p);
    CHECK(all_presets().size() == 7);
    CHECK_THROWS_AS(preset_from_string("nope"), InvalidArgument);
}

TEST_CASE("preset defaults follow the studies")
{
    const auto r = preset_defaults(Preset::robustness);
    CHECK(r.pipeline.system.hurst == 0.2);
    CHECK(r.pipeline.features.k == 100);
    CHECK(r.pipeline.grid.points == 101);
    CHECK(r.pipeline.observation_noise == 0.01);
    CHECK(r.seeds.size() == 10);
    const auto b = preset_defaults(Preset::baseline_compare);
    CHECK(b.pipeline.system.hurst == 0.1);
    CHECK(b.pipeline.features.k == 50);
    CHECK(b.pipeline.n_train == 1000);
    const auto f = preset_defaults(Preset::compression, true);
    CHECK(f.compression.dim == 10);
    CHECK(f.compression.order == 6);
    const auto g = preset_defaults(Preset::irregular_grid);
    CHECK(g.pipeline.system.kind == pipeline::SystemKind::langevin);
    CHECK(g.grid_pairs.size() == 2);
    CHECK(preset_defaults(Preset::irregular_grid, true).grid_pairs.size() == 3);
}

TEST_CASE("config round trip")
{
    for (Preset p : all_presets()) {
        for (bool full : {false, true}) {
            const auto c = preset_defaults(p, full);
            const auto text = text_of(c);
            CHECK(text_of(parse(text)) == text);
        }
    }
    auto c = preset_defaults(Preset::custom);
    c.pipeline.features.activation = rsig::Activation{rsig::ActivationKind::scaled_identity, 0.123456789012345};
    c.pipeline.lambda = 1.0 / 3.0;
    const auto text = text_of(c);
    const auto back = parse(text);
    CHECK(back.pipeline.lambda == c.pipeline.lambda);
    CHECK(back.pipeline.features.activation->slope == 0.123456789012345);
}

TEST_CASE("overrides keep the base for absent keys")
{
    const auto base = preset_defaults(Preset::robustness);
    const auto c = parse("[reservoir]\nk = 7\n[readout]\nlambda = 0.5\n", base);
    CHECK(c.pipeline.features.k == 7);
    CHECK(c.pipeline.lambda == 0.5);
    CHECK(c.pipeline.system.hurst == 0.2);
    CHECK(c.seeds == base.seeds);
    std::istringstream in("[experiment]\npreset = compression\n");
    CHECK(preset_name(in) == "compression");
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(parse("[bogus]\nx = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[reservoir]\nkk = 3\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[reservoir]\nk = three\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[reservoir]\nk = 0\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[experiment]\nseeds =\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[system]\nhurst = 1.5\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("[reservoir]\nslope = 2\n"), InvalidArgument);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini", {}), InvalidArgument);
}

TEST_CASE("report aggregates are recomputable from rows")
{
    ExperimentReport r;
    r.add("a", 1, 0, 1.0);
    r.add("b", 1, 0, 5.0);
    r.add("a", 2, 0, 3.0);
    const auto s = r.summary("a");
    REQUIRE(s);
    CHECK(s->count == 2);
    CHECK(s->mean == 2.0);
    CHECK(s->std == doctest::Approx(std::sqrt(2.0)));
    CHECK(s->min == 1.0);
    CHECK(s->max == 3.0);
    CHECK(r.summary().front().label == "a");
    CHECK(!r.summary("c"));
    CHECK(r.values("a") == std::vector<double>{1.0, 3.0});
    CHECK(metrics_csv(r).rfind("label,seed,item,value\n", 0) == 0);
}

TEST_CASE("isotonic violations")
{
    CHECK(isotonic_violations({3.0, 2.0, 1.0}) == 0.0);
    CHECK(isotonic_violations({1.0, 2.0, 1.0}) == 0.5);
    CHECK(isotonic_violations({1.0, 1.0 + 1e-12}) == 0.0);
}

TEST_CASE("projection error")
{
    CounterRng rng(1);
    Matrix z(6, 3);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    // Targets inside the column span are reproduced exactly at lambda = 0.
    const Eigen::MatrixXd inside = z * Eigen::MatrixXd::Random(3, 2);
    CHECK(projection_error(z, inside * inside.transpose(), 0.0) <= 1e-12);
    // A single target orthogonal to the span leaves all of its energy.
    Eigen::VectorXd e = Eigen::VectorXd::Random(6);
    const Eigen::MatrixXd zd = z;
    e -= zd * zd.colPivHouseholderQr().solve(e);
    CHECK(projection_error(z, e * e.transpose(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(projection_error(z, inside * inside.transpose(), 1.0) > 0.0);
}

TEST_CASE("robustness with one seed has zero spread")
{
    const auto r = run_robustness(small_robustness({1}));
    for (double v : r.values("band_max_std")) CHECK(v == 0.0);
}

TEST_CASE("robustness spread is stable when doubling the seeds")
{
    std::vector<std::uint64_t> ten, twenty;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        if (s <= 10) ten.push_back(s);
        twenty.push_back(s);
    }
    const double a = run_robustness(small_robustness(ten)).summary("band_std_ratio")->mean;
    const double b = run_robustness(small_robustness(twenty)).summary("band_std_ratio")->mean;
    CHECK(std::max(a, b) / std::min(a, b) <= 1.5);
}

TEST_CASE("compression memory guard and operation counts")
{
    auto c = preset_defaults(Preset::compression);
    c.compression.dim = 3;
    c.compression.order = 3;
    c.compression.steps = 20;
    c.compression.ks = {1, 5, 39};
    c.seeds = {1};
    const auto r = run_compression(c);
    CHECK(r.summary("flattened_dim")->max == 39.0);
    for (const auto& row : r.metrics)
        if (row.label == "rsig_ops") CHECK(row.value == static_cast<double>(row.item * row.item * 3));
    CHECK(r.summary("error_at_flat_dim_lambda0")->max <= 1e-8);
    c.compression.memory_budget = 1024;
    CHECK_THROWS_AS(run_compression(c), MemoryBudgetExceeded);
}

TEST_CASE("truncated signatures need far more parameters and flag underdetermined fits")
{
    auto c = preset_defaults(Preset::rsig_vs_tsig);
    c.rsig_vs_tsig.m_values = {2, 6};
    c.rsig_vs_tsig.n_train_values = {1};
    c.pipeline.n_test = 3;
    c.pipeline.grid.points = 51;
    const auto r = run_rsig_vs_tsig(c);
    CHECK(r.summary("m6_n1/tsig_params")->mean > 10.0 * r.summary("m6_n1/rsig_params")->mean);
    CHECK(r.summary("m6_n1/tsig_underdetermined")->mean == 1.0);
    CHECK(r.summary("m2_n1/tsig_underdetermined")->mean == 0.0);
}

TEST_CASE("write_report emits every file")
{
    auto c = small_robustness({1, 2});
    const auto r = run_experiment(c);
    const auto dir = std::filesystem::temp_directory_path() / "randsig_report_test";
    std::filesystem::remove_all(dir);
    write_report(r, dir);
    for (const char* name : {"metrics.csv", "summary.csv", "timings.csv", "report.txt", "config.ini"})
        CHECK(std::filesystem::exists(dir / name));
    for (const auto& [name, _] : r.files) CHECK(std::filesystem::exists(dir / name));
    std::ifstream in(dir / "config.ini");
    const auto back = parse_config(in, {});
    CHECK(text_of(back) == r.config_echo);
    std::filesystem::remove_all(dir);
}
