#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "vqc/ansatz.hpp"
#include "vqc/models.hpp"
#include "vqc/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace vqc;

namespace {

ModelConfig boston_cfg(Arch arch) {
    ModelConfig c;
    c.architecture = arch;
    c.task = Task::Regression;
    c.depth = 3;
    return c;
}

double model_loss(const Model &m, const VectorXd &params, const VectorXd &x, double y) {
    Tape tape(params, false);
    const int out = m.forward(tape, x);
    if (m.config().task == Task::Regression)
        return std::pow(tape.value(out)[0] - y, 2);
    Tape tape2(params, false);
    return tape2.value(tape2.cross_entropy_loss(m.forward(tape2, x), int(y)))[0];
}

} // namespace

TEST_CASE("tokenize pads to T rows of 3") {
    CounterRng rng(50);
    const VectorXd x13 = oracle::random_vector(13, rng, -1, 1);
    const MatrixXd m = tokenize(x13, 13);
    CHECK(m.rows() == 5);
    CHECK(m(4, 1) == doctest::Approx(0.0)); // padding
    CHECK(m(4, 2) == doctest::Approx(0.0));
    CHECK(m(0, 0) == doctest::Approx(x13[0]));
    CHECK(m(4, 0) == doctest::Approx(x13[12]));

    CHECK(tokenize(oracle::random_vector(3, rng, -1, 1), 3).rows() == 1);
    const MatrixXd m8 = tokenize(oracle::random_vector(8, rng, -1, 1), 8);
    CHECK(m8.rows() == 3);
    CHECK(m8(2, 2) == doctest::Approx(0.0));
    CHECK(token_count(13) == 5);
    CHECK(token_count(8) == 3);
}

TEST_CASE("type4_mix follows the transpose-flatten-rechunk order") {
    MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6; // rows [a b c], [d e f]
    const MatrixXd out = type4_mix(m);
    CHECK(out(0, 0) == 1); // a
    CHECK(out(0, 1) == 4); // d
    CHECK(out(0, 2) == 2); // b
    CHECK(out(1, 0) == 5); // e
    CHECK(out(1, 1) == 3); // c
    CHECK(out(1, 2) == 6); // f
}

TEST_CASE("type4_mix is an involution for T = 3 and always a permutation") {
    CounterRng rng(51);
    MatrixXd m(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = rng.uniform(-1, 1);
    const MatrixXd twice = type4_mix(type4_mix(m));
    CHECK((twice - m).cwiseAbs().maxCoeff() < 1e-15);

    for (int T : {1, 2, 4, 5, 7}) {
        const auto perm = type4_perm(T);
        std::vector<int> seen(perm.size(), 0);
        for (int p : perm) ++seen[std::size_t(p)];
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        const auto inv = type4_perm_inverse(T);
        for (std::size_t j = 0; j < perm.size(); ++j) CHECK(inv[std::size_t(perm[j])] == int(j));
    }
}

TEST_CASE("type3_shift routes neighbors and keeps the middle element") {
    MatrixXd m(3, 3);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const MatrixXd out = type3_shift(m);
    // row t = (M[t-1][2], M[t][1], M[t+1][0])
    CHECK(out(0, 0) == 9);
    CHECK(out(0, 1) == 2);
    CHECK(out(0, 2) == 4);
    CHECK(out(1, 0) == 3);
    CHECK(out(1, 1) == 5);
    CHECK(out(1, 2) == 7);
    CHECK(out(2, 0) == 6);
    CHECK(out(2, 1) == 8);
    CHECK(out(2, 2) == 1);

    // T = 1 self-wrap reverses the row
    MatrixXd one(1, 3);
    one << 1, 2, 3;
    const MatrixXd o1 = type3_shift(one);
    CHECK(o1(0, 0) == 3);
    CHECK(o1(0, 1) == 2);
    CHECK(o1(0, 2) == 1);

    for (int T : {1, 2, 3, 5}) {
        const auto perm = type3_perm(T);
        std::vector<int> seen(perm.size(), 0);
        for (int p : perm) ++seen[std::size_t(p)];
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("Boston parameter breakdown matches the reference totals") {
    // T = 5, depth 3, H = 1
    const auto fc = count_params(boston_cfg(Arch::FcVqc), 13);
    CHECK(fc.vqc_params == 720);
    CHECK(fc.attention_params == 0);
    CHECK(fc.ln_proj_params == 0);
    CHECK(fc.total == 720);

    const auto res = count_params(boston_cfg(Arch::ResnetVqc), 13);
    CHECK(res.vqc_params == 720);
    CHECK(res.total == 720);

    const auto qt = count_params(boston_cfg(Arch::Qt), 13);
    CHECK(qt.attention_params == 405);
    CHECK(qt.vqc_params == 690);
    CHECK(qt.ln_proj_params == 285);
    CHECK(qt.total == 1380);

    const auto fqt = count_params(boston_cfg(Arch::Fqt), 13);
    CHECK(fqt.attention_params == 135);
    CHECK(fqt.vqc_params == 720);
    CHECK(fqt.ln_proj_params == 0);
    CHECK(fqt.total == 855);
}

TEST_CASE("every vqc slice obeys the 3nd rule") {
    for (Arch arch : {Arch::FcVqc, Arch::ResnetVqc, Arch::Qt, Arch::Fqt}) {
        const Model m = Model::build(boston_cfg(arch), 13);
        for (const auto &s : m.slices()) {
            if (s.cat == Model::Slice::Cat::LnProj) continue;
            // quantum slices: 3 * n * d with n in {3, T} and d in {1, depth}
            const bool ok = s.len % 3 == 0 &&
                            (s.len / 3 % 3 == 0 || s.len / 3 % m.tokens() == 0);
            CHECK(ok);
        }
    }
}

TEST_CASE("structural audit: allocation equals count_params for the whole grid") {
    for (Arch arch : {Arch::FcVqc, Arch::ResnetVqc, Arch::Qt, Arch::Fqt}) {
        for (int heads : {1, 2, 3}) {
            for (bool attn : {true, false}) {
                ModelConfig c = boston_cfg(arch);
                c.heads = heads;
                c.attention_enabled = attn;
                const Model m = Model::build(c, 13);
                const auto b = m.breakdown();
                CHECK(m.n_params() == b.total);
                CHECK(m.init_params(3).size() == b.total);
                // slices tile [0, total) without gaps or overlap
                long covered = 0;
                for (const auto &s : m.slices()) covered += s.len;
                CHECK(covered == b.total);
            }
        }
    }
}

TEST_CASE("disabling attention removes exactly the attention component") {
    for (Arch arch : {Arch::Qt, Arch::Fqt}) {
        ModelConfig on = boston_cfg(arch);
        ModelConfig off = on;
        off.attention_enabled = false;
        const auto b_on = count_params(on, 13);
        const auto b_off = count_params(off, 13);
        CHECK(b_off.attention_params == 0);
        CHECK(b_on.total - b_off.total == b_on.attention_params);
        CHECK(b_off.total < b_on.total);
    }
}

TEST_CASE("type3 FFN keeps counts; +LN adds exactly two norms") {
    ModelConfig t3 = boston_cfg(Arch::Qt);
    t3.ffn_connectivity = FfnConnectivity::Type3;
    CHECK(count_params(t3, 13).total == 1380);

    ModelConfig ln = boston_cfg(Arch::Fqt);
    ln.layernorm_enabled = true;
    CHECK(count_params(ln, 13).total == 855 + 2 * 2 * 15);
}

TEST_CASE("multi-head scaling: QT grows by 405/head, FQT by 135/head plus merge") {
    ModelConfig qt2 = boston_cfg(Arch::Qt);
    qt2.heads = 2;
    const auto b2 = count_params(qt2, 13);
    CHECK(b2.attention_params == 810);
    // W_O widens to 30 x 15
    CHECK(b2.ln_proj_params == 30 * 15 + 60);

    ModelConfig fqt2 = boston_cfg(Arch::Fqt);
    fqt2.heads = 2;
    const auto f2 = count_params(fqt2, 13);
    CHECK(f2.attention_params == 270);
    CHECK(f2.ln_proj_params == 2 * 15 * 15); // merge projection appears for H > 1
}

TEST_CASE("single 3-qubit depth-2 block counts 18 parameters") {
    ModelConfig c;
    c.architecture = Arch::FcVqc;
    c.depth = 2;
    c.stem_stages = 1;
    const Model m = Model::build(c, 3); // one token
    bool found = false;
    for (const auto &s : m.slices())
        if (s.name == "stage0_t0") {
            CHECK(s.len == 18);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("fc_vqc forward: zero angles and zero input give deterministic readout") {
    ModelConfig c = boston_cfg(Arch::FcVqc);
    const Model m = Model::build(c, 13);
    VectorXd params = VectorXd::Zero(m.n_params()); // identity rotations
    Tape tape(params, false);
    const int out = m.forward(tape, VectorXd::Zero(13).eval());
    // all intermediate measurements are 1; final block sees all-one angles
    CHECK(std::isfinite(tape.value(out)[0]));
    CHECK(tape.value(out)[0] <= 1.0 + 1e-12);
    CHECK(tape.value(out)[0] >= -1.0 - 1e-12);
}

TEST_CASE("readout of zero tokens through zero-angle blocks gives unit scalars") {
    // the 3->1 readout block on a zero token: <Z_0> of the identity circuit
    ParamBlock<double> zero_block(3, 3);
    const auto sched = EntanglerSchedule::ring_shift(3, 3);
    CHECK(run_block(VectorXd::Zero(3).eval(), zero_block, sched)[0] ==
          doctest::Approx(1.0).epsilon(1e-12));

    // inside a zero-parameter model the stage outputs are all ones, so the
    // readout scalars must equal the independent simulation of that block
    ModelConfig c = boston_cfg(Arch::FcVqc);
    c.stem_stages = 1;
    const Model m = Model::build(c, 13);
    VectorXd params = VectorXd::Zero(m.n_params());
    Tape tape(params, false);
    m.forward(tape, VectorXd::Zero(13).eval());
    int scalars = -1;
    for (std::size_t id = 0; id < tape.size(); ++id) {
        const auto &n = tape.node(int(id));
        if (n.kind == Tape::Kind::Concat && n.value.size() == 5 &&
            tape.node(n.inputs[0]).kind == Tape::Kind::Slice)
            scalars = int(id);
    }
    REQUIRE(scalars >= 0);
    const double expected = run_block(VectorXd::Ones(3).eval(), zero_block, sched)[0];
    for (int t = 0; t < 5; ++t)
        CHECK(tape.value(scalars)[t] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("all architectures produce finite bounded outputs on random inputs") {
    CounterRng rng(52);
    for (Arch arch : {Arch::FcVqc, Arch::ResnetVqc, Arch::Qt, Arch::Fqt}) {
        const Model m = Model::build(boston_cfg(arch), 13);
        const VectorXd params = m.init_params(1);
        for (int rep = 0; rep < 2; ++rep) {
            const VectorXd x = oracle::random_vector(13, rng, -2, 2);
            Tape tape(params, false);
            const double y = tape.value(m.forward(tape, x))[0];
            CHECK(std::isfinite(y));
            CHECK(std::abs(y) <= 1.0 + 1e-12); // Z-measurement readout
        }
    }
}

TEST_CASE("resnet equal-width stages subtract to the identity skip") {
    ModelConfig c = boston_cfg(Arch::ResnetVqc);
    c.stem_stages = 1;
    const Model m = Model::build(c, 13);
    const VectorXd params = m.init_params(5);
    CounterRng rng(53);
    const VectorXd x = oracle::random_vector(13, rng, -1, 1);

    // stage output: gather(add(blocks(u), u)); undo the permutation and
    // subtract the padded input to recover the pure block output
    Tape tape(params, false);
    m.forward(tape, x);
    // locate the add node feeding the first gather after the stage blocks
    bool checked = false;
    for (std::size_t id = 0; id < tape.size(); ++id) {
        const auto &n = tape.node(int(id));
        if (n.kind == Tape::Kind::Add && tape.node(n.inputs[1]).kind == Tape::Kind::Pad) {
            const VectorXd &sum = n.value;
            const VectorXd &skip = tape.node(n.inputs[1]).value;
            const VectorXd &blocks = tape.node(n.inputs[0]).value;
            CHECK((sum - skip - blocks).cwiseAbs().maxCoeff() < 1e-14);
            checked = true;
            break;
        }
    }
    CHECK(checked);
}

TEST_CASE("resnet gradient flows through both paths (finite differences)") {
    ModelConfig c = boston_cfg(Arch::ResnetVqc);
    c.stem_stages = 2;
    const Model m = Model::build(c, 7); // small: T = 3
    VectorXd params = m.init_params(2);
    CounterRng rng(54);
    const VectorXd x = oracle::random_vector(7, rng, -1, 1);
    const double y = 0.3;

    Tape tape(params, true);
    const int out = m.forward(tape, x);
    const int loss = tape.mse_loss(out, VectorXd::Constant(1, y));
    VectorXd grad = VectorXd::Zero(params.size());
    tape.backward(loss, grad);

    const VectorXd fd = oracle::finite_difference(
        [&](const VectorXd &p) { return model_loss(Model::build(c, 7), p, x, y); }, params);
    for (Eigen::Index i = 0; i < params.size(); ++i)
        CHECK(grad[i] == doctest::Approx(fd[i]).epsilon(1e-4).scale(1.0));
}

TEST_CASE("qt classification gradient matches finite differences end to end") {
    ModelConfig c = boston_cfg(Arch::Qt);
    c.task = Task::Classification;
    c.n_classes = 4;
    c.depth = 1;
    c.ffn_rounds = 1;
    const Model m = Model::build(c, 7); // T = 3
    const VectorXd params = m.init_params(3);
    CounterRng rng(56);
    const VectorXd x = oracle::random_vector(7, rng, -1, 1);
    const int label = 2;

    Tape tape(params, true);
    const int loss = tape.cross_entropy_loss(m.forward(tape, x), label);
    VectorXd grad = VectorXd::Zero(params.size());
    tape.backward(loss, grad);

    const VectorXd fd = oracle::finite_difference(
        [&](const VectorXd &p) {
            Tape t(p, false);
            return t.value(t.cross_entropy_loss(m.forward(t, x), label))[0];
        },
        params);
    for (Eigen::Index i = 0; i < params.size(); ++i)
        CHECK(std::abs(grad[i] - fd[i]) <=
              1e-5 * std::max(1.0, std::max(std::abs(grad[i]), std::abs(fd[i]))));
}

TEST_CASE("resnet skip projection allocates and trains when enabled") {
    ModelConfig c = boston_cfg(Arch::ResnetVqc);
    c.skip_projection = true;
    const Model m = Model::build(c, 13);
    const auto b = m.breakdown();
    CHECK(b.ln_proj_params == (15 + 1) * 5); // dense 3T -> T with bias
    const VectorXd params = m.init_params(1);
    CounterRng rng(55);
    Tape tape(params, false);
    CHECK(std::isfinite(tape.value(m.forward(tape, oracle::random_vector(13, rng, -1, 1)))[0]));
}

TEST_CASE("classification heads emit n_classes logits") {
    for (Arch arch : {Arch::FcVqc, Arch::Qt, Arch::Fqt}) {
        ModelConfig c = boston_cfg(arch);
        c.task = Task::Classification;
        c.n_classes = 6;
        const Model m = Model::build(c, 11);
        const VectorXd params = m.init_params(9);
        Tape tape(params, false);
        const int out = m.forward(tape, VectorXd::Zero(11).eval());
        CHECK(tape.value(out).size() == 6);
    }
}

TEST_CASE("mlp: zero weights output the bias; the param formula is exact") {
    ModelConfig c;
    c.architecture = Arch::Mlp;
    c.mlp_hidden = {4};
    const Model m = Model::build(c, 3);
    CHECK(m.n_params() == (3 + 1) * 4 + (4 + 1) * 1);
    VectorXd params = VectorXd::Zero(m.n_params());
    params[m.n_params() - 1] = 0.77; // head bias
    Tape tape(params, false);
    CHECK(tape.value(m.forward(tape, VectorXd::Zero(3).eval()))[0] == doctest::Approx(0.77));
}

TEST_CASE("mlp hidden search lands within 5% of the 720 budget for Boston") {
    const auto hidden = mlp_hidden_search(13, 1, 720);
    REQUIRE(hidden.size() == 1);
    CHECK(hidden[0] == 48);
    ModelConfig c;
    c.architecture = Arch::Mlp;
    c.mlp_target_params = 720;
    const Model m = Model::build(c, 13);
    CHECK(m.n_params() == 721);
    CHECK(std::abs(double(m.n_params()) - 720.0) <= 0.05 * 720.0);
}

TEST_CASE("config validation rejects malformed models") {
    ModelConfig c;
    c.depth = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    ModelConfig c2;
    c2.task = Task::Classification;
    c2.n_classes = 1;
    CHECK_THROWS_AS(c2.validate(), ConfigError);
    ModelConfig c3;
    CHECK_THROWS_AS(Model::build(c3, 0), ConfigError);
}
