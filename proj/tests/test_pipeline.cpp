#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "randsig/errors.hpp"
#include "randsig/pipeline.hpp"

#include <array>
#include <cmath>

using namespace randsig;
using namespace randsig::pipeline;

namespace {

PipelineConfig small_fou()
{
    PipelineConfig c;
    c.grid.points = 41;
    c.features.k = 20;
    c.n_train = 30;
    c.n_test = 10;
    c.data_seed = 3;
    c.feature_seed = 4;
    return c;
}

}  // namespace

TEST_CASE("sample generator shapes")
{
    const auto c = small_fou();
    SampleGenerator gen(c.system, c.grid);
    CounterRng rng(1);
    const auto s = gen(rng);
    CHECK(s.control.dim() == 2);
    CHECK(s.target.dim() == 1);
    CHECK(s.control.size() == 41);
    for (std::size_t n = 0; n < s.control.size(); ++n) CHECK(s.control(n, 0) == s.control.grid()[n]);
    CHECK(s.target(0, 0) == 1.0);
    CHECK(gen.control_dim() == 2);
}

TEST_CASE("enzyme control laws")
{
    SystemConfig sys;
    sys.kind = SystemKind::enzyme;
    GridConfig grid;
    SampleGenerator gen(sys, grid);
    CounterRng a(2), b(2);
    const auto square = gen(a, ControlLaw::squared_brownian);
    const auto step = gen(b, ControlLaw::threshold_step);
    for (std::size_t n = 0; n < square.control.size(); ++n) {
        const double w2 = square.control(n, 1);
        CHECK(w2 >= 0.0);
        CHECK(step.control(n, 1) == (w2 > 0.5 ? 0.5 : 0.0));
    }
}

TEST_CASE("irregular grids differ per sample")
{
    auto c = small_fou();
    c.system.kind = SystemKind::langevin;
    c.grid.irregular = true;
    c.grid.points = 11;
    const auto d = make_dataset(c);
    CHECK(d.train[0].control.grid() != d.train[1].control.grid());
    CHECK(d.train[0].control.grid().horizon() == 1.0);
}

TEST_CASE("datasets are prefix stable")
{
    auto c = small_fou();
    const auto big = make_dataset(c);
    c.n_train = 5;
    c.n_test = 2;
    const auto small = make_dataset(c);
    for (std::size_t i = 0; i < 5; ++i) CHECK(small.train[i].control.values() == big.train[i].control.values());
    for (std::size_t i = 0; i < 2; ++i) CHECK(small.test[i].target.values() == big.test[i].target.values());
}

TEST_CASE("observation noise only touches training targets")
{
    auto c = small_fou();
    const auto clean = make_dataset(c);
    c.observation_noise = 0.01;
    const auto noisy = make_dataset(c);
    CHECK(noisy.train[0].control.values() == clean.train[0].control.values());
    CHECK(noisy.train[0].target.values() != clean.train[0].target.values());
    CHECK(noisy.test[0].target.values() == clean.test[0].target.values());
}

TEST_CASE("a target spanned by the features is recovered")
{
    auto c = small_fou();
    const auto data = make_dataset(c);
    const auto map = FeatureMap::build(c.features, 2, c.feature_seed);
    auto realizable = [&](const std::vector<Sample>& in) {
        std::vector<Sample> out;
        for (const auto& s : in) {
            const auto z = map(s.control);
            out.push_back({s.control, paths::Path(z.grid(), z.values().col(0))});
        }
        return out;
    };
    const auto train = realizable(data.train);
    const auto test = realizable(data.test);
    PipelineResult r{map, fit_readout(map, train, 0.0), {}, {}, 0.0, 0.0, 0.0};
    evaluate(r, test);
    CHECK(r.error.mean <= 1e-8);
    CHECK(r.pooled_error <= 1e-8);
}

TEST_CASE("pipeline is deterministic and reports every test trajectory")
{
    const auto c = small_fou();
    const auto a = train_pipeline(c);
    const auto b = train_pipeline(c);
    CHECK(a.test_errors == b.test_errors);
    CHECK(a.model.beta == b.model.beta);
    REQUIRE(a.test_errors.size() == 10);
    CHECK(a.error.mean < 0.5);
}

TEST_CASE("feature maps")
{
    FeatureConfig rs;
    rs.k = 7;
    const auto r = FeatureMap::build(rs, 2, 1);
    REQUIRE(r.reservoir() != nullptr);
    CHECK(r.reservoir()->activation == rsig::default_activation(7, 2));
    CHECK(r.dim() == 7);

    FeatureConfig ts;
    ts.kind = FeatureKind::tsig;
    ts.tsig_order = 2;
    const auto t = FeatureMap::build(ts, 2, 1);
    CHECK(t.dim() == 7);
    CounterRng rng(1);
    const auto x = paths::time_augment(paths::sample_brownian(paths::regular_grid(1.0, 5), 1, rng));
    const auto f = t(x);
    CHECK((f.values().col(0).array() == 1.0).all());

    FeatureConfig es;
    es.kind = FeatureKind::esn;
    es.esn.size = 12;
    const auto e = FeatureMap::build(es, 2, 1);
    REQUIRE(e.echo_state() != nullptr);
    CHECK(e(x).dim() == 12);
    CHECK(r.describe() != e.describe());
}

TEST_CASE("k selection on a held-out split")
{
    auto c = small_fou();
    const std::array<int, 3> ks{2, 10, 20};
    const auto s = select_k(c, ks);
    REQUIRE(s.validation_error.size() == 3);
    CHECK(s.best_k != 0);
    double best = s.validation_error.front().second;
    for (const auto& [k, e] : s.validation_error) best = std::min(best, e);
    for (const auto& [k, e] : s.validation_error)
        if (k == s.best_k) CHECK(e == best);
    CHECK_THROWS_AS(select_k(c, ks, 1.0), InvalidArgument);
}

TEST_CASE("grid validation")
{
    GridConfig g;
    g.points = 1;
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
    g.points = 2;
    g.irregular = true;
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
}
