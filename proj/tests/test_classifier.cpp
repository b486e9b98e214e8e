#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scrawl/classifier.hpp"
#include "scrawl/finite_diff.hpp"
#include "support/helpers.hpp"

using namespace scrawl;
using clf::ClassifierModel;
using clf::LabeledFeatures;
using clf::NetSpec;
using num::Matrix;

namespace {

NetSpec tiny_spec(int layers = 1) {
    NetSpec s;
    s.input_dim = 6;
    s.hidden_dims = layers == 1 ? std::vector<int>{4} : std::vector<int>{3, 4};
    s.full_dim = 4;
    s.class_count = 3;
    s.cell = cells::CellKind::Gru;
    s.dropout_pool = 0.0;
    s.dropout_input = 0.0;
    return s;
}

std::vector<ink::LineFeature> random_feats(Rng& rng, int k, double span = 1.0) {
    std::vector<ink::LineFeature> feats;
    for (int i = 0; i < k; ++i) {
        const bool down = uniform(rng, 0.0, 1.0) < 0.8;
        feats.push_back({uniform(rng, -span, span), uniform(rng, -span, span),
                         uniform(rng, -span, span), uniform(rng, -span, span),
                         down ? 1.0 : 0.0, down ? 0.0 : 1.0});
    }
    return feats;
}

// widen weights so gradient checks stay clear of the finite-difference
// noise floor (tiny gradients make the relative metric noise-dominated)
void widen(ClassifierModel& m, Rng& rng, double span = 0.5) {
    for (const auto& ref : m.params())
        for (int i = 0; i < ref.value->size(); ++i) (*ref.value)[i] = uniform(rng, -span, span);
}

} // namespace

TEST_CASE("forward emits a probability vector") {
    Rng rng(1);
    const auto m = clf::init_classifier(tiny_spec(2), rng);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix probs = clf::forward(m, random_feats(rng, uniform_int(rng, 1, 9)));
        double sum = 0.0;
        for (int i = 0; i < probs.size(); ++i) {
            CHECK(probs[i] > 0.0);
            sum += probs[i];
        }
        CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(clf::forward(m, {}), EmptyInkError);
}

TEST_CASE("eval-mode forward is deterministic") {
    Rng rng(2);
    const auto m = clf::init_classifier(tiny_spec(2), rng);
    const auto feats = random_feats(rng, 7);
    CHECK(clf::forward(m, feats) == clf::forward(m, feats));
}

TEST_CASE("single-feature pooling is the two-direction average") {
    Rng rng(3);
    ClassifierModel m = clf::init_classifier(tiny_spec(1), rng);
    widen(m, rng);
    const auto feats = random_feats(rng, 1);

    // independent head computation from one manual cell step per direction
    num::Tape tape;
    Matrix x(6, 1);
    for (int i = 0; i < 6; ++i) x[i] = feats[0][static_cast<std::size_t>(i)];
    const auto fwd = cells::bind(tape, m.layers[0].forward, false);
    const auto bwd = cells::bind(tape, m.layers[0].backward, false);
    auto s0 = cells::zero_state(tape, m.spec.cell, 4);
    const Matrix h = cells::cell_step(tape, fwd, tape.constant(x), s0).h.value();
    const Matrix hp = cells::cell_step(tape, bwd, tape.constant(x), s0).h.value();
    Matrix pooled(4, 1);
    for (int i = 0; i < 4; ++i) pooled[i] = 0.5 * (h[i] + hp[i]);
    const Matrix expected =
        num::softmax(num::affine(m.soft_w, num::map_tanh(num::affine(m.full_w, pooled, m.full_b)), m.soft_b));

    const Matrix probs = clf::forward(m, feats);
    for (int i = 0; i < probs.size(); ++i)
        CHECK(probs[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("reversing input and swapping directions preserves the output") {
    Rng rng(4);

    SUBCASE("single layer") {
        ClassifierModel a = clf::init_classifier(tiny_spec(1), rng);
        widen(a, rng);
        ClassifierModel b = a;
        std::swap(b.layers[0].forward, b.layers[0].backward);

        const auto feats = random_feats(rng, 6);
        auto reversed = feats;
        std::reverse(reversed.begin(), reversed.end());

        const Matrix pa = clf::forward(a, feats);
        const Matrix pb = clf::forward(b, reversed);
        for (int i = 0; i < pa.size(); ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-12));
    }

    SUBCASE("two layers with swapped inter-layer channel blocks") {
        ClassifierModel a = clf::init_classifier(tiny_spec(2), rng);
        widen(a, rng);
        ClassifierModel b = a;
        std::swap(b.layers[0].forward, b.layers[0].backward);
        std::swap(b.layers[1].forward, b.layers[1].backward);
        // layer-2 inputs are [fwd ; bwd]; swapping directions swaps the halves
        const int half = a.spec.hidden_dims[0];
        for (auto* side : {&b.layers[1].forward, &b.layers[1].backward}) {
            auto& gru = std::get<cells::GruParams>(*side);
            for (Matrix* w : {&gru.W_r, &gru.W_z, &gru.W})
                for (int r = 0; r < w->rows(); ++r)
                    for (int c = 0; c < half; ++c) std::swap((*w)(r, c), (*w)(r, c + half));
        }

        const auto feats = random_feats(rng, 5);
        auto reversed = feats;
        std::reverse(reversed.begin(), reversed.end());

        const Matrix pa = clf::forward(a, feats);
        const Matrix pb = clf::forward(b, reversed);
        for (int i = 0; i < pa.size(); ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-12));
    }
}

TEST_CASE("nll of a uniform model equals log class count") {
    Rng rng(5);
    ClassifierModel m = clf::init_classifier(tiny_spec(1), rng);
    m.soft_w.fill(0.0);
    m.soft_b.fill(0.0);
    std::vector<LabeledFeatures> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({random_feats(rng, 5), i % 3});
    Rng loss_rng(0);
    CHECK(clf::nll_loss(m, batch, loss_rng) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("nll vanishes as the true class probability approaches one") {
    Rng rng(6);
    ClassifierModel m = clf::init_classifier(tiny_spec(1), rng);
    m.soft_w.fill(0.0);
    m.soft_b.fill(0.0);
    m.soft_b[1] = 30.0;
    Rng loss_rng(0);
    const double loss = clf::nll_loss(m, {{random_feats(rng, 4), 1}}, loss_rng);
    CHECK(loss >= 0.0);
    CHECK(loss < 1e-10);
}

TEST_CASE("nll rejects bad labels") {
    Rng rng(7);
    ClassifierModel m = clf::init_classifier(tiny_spec(1), rng);
    Rng loss_rng(0);
    CHECK_THROWS_AS(clf::nll_loss(m, {{random_feats(rng, 3), 3}}, loss_rng), LabelError);
    CHECK_THROWS_AS(clf::nll_loss(m, {{random_feats(rng, 3), -1}}, loss_rng), LabelError);
}

TEST_CASE("classifier gradients match finite differences") {
    Rng rng(5);
    ClassifierModel m = clf::init_classifier(tiny_spec(2), rng);
    widen(m, rng, 0.8);
    std::vector<LabeledFeatures> batch;
    batch.push_back({random_feats(rng, 4, 1.5), 2});
    batch.push_back({random_feats(rng, 3, 1.5), 0});

    ParamSet params = m.params();
    std::vector<Matrix> analytic = zeros_like(params);
    Rng loss_rng(0);
    clf::nll_loss(m, batch, loss_rng, &analytic);

    auto f = [&]() {
        Rng r(0);
        return clf::nll_loss(m, batch, r);
    };
    const auto numeric = num::finite_difference(f, params, 1e-5);
    CHECK(num::max_relative_error(analytic, numeric) < 1e-4);
}

TEST_CASE("training separates constant from alternating directions") {
    // class 0 drifts right; class 1 alternates left/right
    std::vector<LabeledFeatures> corpus;
    Rng gen_rng(9);
    for (int n = 0; n < 10; ++n) {
        std::vector<ink::LineFeature> constant, alternating;
        double x = 0.0;
        for (int t = 0; t < 6; ++t) {
            const double dx = 0.4 + normal(gen_rng, 0.0, 0.03);
            constant.push_back({x, 0, dx, 0, 1, 0});
            x += dx;
        }
        x = 0.0;
        for (int t = 0; t < 6; ++t) {
            const double dx = (t % 2 == 0 ? 0.4 : -0.4) + normal(gen_rng, 0.0, 0.03);
            alternating.push_back({x, 0, dx, 0, 1, 0});
            x += dx;
        }
        corpus.push_back({constant, 0});
        corpus.push_back({alternating, 1});
    }

    NetSpec spec = tiny_spec(1);
    spec.hidden_dims = {8};
    spec.full_dim = 8;
    spec.class_count = 2;
    Rng rng(10);
    ClassifierModel m = clf::init_classifier(spec, rng);

    optim::OptConfig cfg;
    cfg.max_epochs = 50;
    cfg.batch_size = 4;
    cfg.lr = 0.01;
    Rng train_rng(11);
    const auto history = clf::train(m, corpus, cfg, train_rng);
    CHECK(history.back().loss < history.front().loss);

    int correct = 0;
    for (const auto& sample : corpus)
        if (num::argmax(clf::forward(m, sample.feats)) == sample.label) ++correct;
    CHECK(correct == static_cast<int>(corpus.size()));
}

TEST_CASE("training loss decreases over the first epochs") {
    Rng rng(12);
    std::vector<LabeledFeatures> corpus;
    for (int i = 0; i < 12; ++i) {
        auto feats = random_feats(rng, 6);
        // make the label readable from the mean direction
        const int label = i % 3;
        for (auto& f : feats) f[2] = 0.5 * (label - 1);
        corpus.push_back({feats, label});
    }
    NetSpec spec = tiny_spec(1);
    Rng init_rng(13);
    ClassifierModel m = clf::init_classifier(spec, init_rng);
    optim::OptConfig cfg;
    cfg.max_epochs = 5;
    cfg.batch_size = 4;
    cfg.lr = 0.01;
    Rng train_rng(14);
    const auto history = clf::train(m, corpus, cfg, train_rng);
    CHECK(history[4].loss < history[0].loss);
}

TEST_CASE("training is reproducible with a fixed seed and no input dropout") {
    Rng rng(15);
    std::vector<LabeledFeatures> corpus;
    for (int i = 0; i < 8; ++i) corpus.push_back({random_feats(rng, 4), i % 2});

    auto run = [&]() {
        NetSpec spec = tiny_spec(1);
        spec.class_count = 2;
        Rng init_rng(16);
        ClassifierModel m = clf::init_classifier(spec, init_rng);
        optim::OptConfig cfg;
        cfg.max_epochs = 3;
        cfg.batch_size = 4;
        Rng train_rng(17);
        const auto history = clf::train(m, corpus, cfg, train_rng);
        return std::make_pair(m.soft_w, history);
    };
    const auto [w1, h1] = run();
    const auto [w2, h2] = run();
    CHECK(w1 == w2);
    for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].loss == h2[i].loss);
}

TEST_CASE("ensemble prediction") {
    Rng rng(18);
    const auto m = clf::init_classifier(tiny_spec(1), rng);
    const auto feats = random_feats(rng, 8);

    SUBCASE("n_sub = 1 with p = 0 equals the plain forward") {
        Rng r(0);
        const Matrix a = clf::predict_ensemble(m, feats, 1, 0.0, r);
        const Matrix b = clf::forward(m, feats);
        CHECK(a == b);
    }

    SUBCASE("argmax is invariant under averaging identical full-sequence draws") {
        Rng r(3);
        const Matrix averaged = clf::predict_ensemble(m, feats, 3, 0.0, r);
        CHECK(num::argmax(averaged) == num::argmax(clf::forward(m, feats)));
    }

    SUBCASE("averaged output stays on the simplex") {
        Rng r(1);
        const Matrix probs = clf::predict_ensemble(m, feats, 10, 0.3, r);
        double sum = 0.0;
        for (int i = 0; i < probs.size(); ++i) sum += probs[i];
        CHECK(std::fabs(sum - 1.0) < 1e-9);
    }

    SUBCASE("rejects a non-positive draw count") {
        Rng r(2);
        CHECK_THROWS_AS(clf::predict_ensemble(m, feats, 0, 0.3, r), InvalidConfigError);
    }
}

TEST_CASE("probability averaging utility") {
    const Matrix a = Matrix::column({0.2, 0.8});
    const Matrix b = Matrix::column({0.6, 0.4});
    const Matrix mean = clf::average_probabilities({a, b});
    CHECK(mean[0] == doctest::Approx(0.4));
    CHECK(mean[1] == doctest::Approx(0.6));
}

TEST_CASE("evaluate fills the report") {
    Rng rng(19);
    NetSpec spec = tiny_spec(1);
    spec.class_count = 2;
    ClassifierModel m = clf::init_classifier(spec, rng);
    std::vector<LabeledFeatures> corpus;
    for (int i = 0; i < 6; ++i) corpus.push_back({random_feats(rng, 4), i % 2});
    const auto report = clf::evaluate(m, corpus);
    CHECK(report.per_class_accuracy.size() == 2);
    CHECK(report.confusion.size() == 2);
    int total = 0;
    for (const auto& row : report.confusion)
        for (int c : row) total += c;
    CHECK(total == 6);
}

TEST_CASE("architecture strings and presets") {
    CHECK(clf::net_preset("net4").architecture_string() == "6->[100,500]->200->3755");
    CHECK(clf::net_preset("net4").cell == cells::CellKind::Gru);
    CHECK(clf::net_preset("net5").hidden_dims == std::vector<int>{100, 300, 500});
    CHECK(clf::net_preset("net1").cell == cells::CellKind::Lstm);
    NetSpec desk = clf::net_preset("desk-clf");
    desk.class_count = 10;
    CHECK(desk.architecture_string() == "6->[32,64]->64->10");
    CHECK_THROWS_AS(clf::net_preset("net9"), InvalidConfigError);
}
