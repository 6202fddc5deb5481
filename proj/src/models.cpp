#include "vqc/models.hpp"

#include "vqc/rng.hpp"

#include <cmath>
#include <limits>

namespace vqc {

Arch arch_from_string(const std::string &s) {
    if (s == "fc_vqc") return Arch::FcVqc;
    if (s == "resnet_vqc") return Arch::ResnetVqc;
    if (s == "qt") return Arch::Qt;
    if (s == "fqt") return Arch::Fqt;
    if (s == "mlp") return Arch::Mlp;
    throw ConfigError("unknown architecture '" + s + "'");
}

std::string arch_to_string(Arch a) {
    switch (a) {
    case Arch::FcVqc: return "fc_vqc";
    case Arch::ResnetVqc: return "resnet_vqc";
    case Arch::Qt: return "qt";
    case Arch::Fqt: return "fqt";
    case Arch::Mlp: return "mlp";
    }
    return "?";
}

int token_count(int n_feat) { return (n_feat + 2) / 3; }

MatrixXd tokenize(const VectorXd &x, int n_feat) {
    if (x.size() != n_feat) throw ConfigError("tokenize: feature count mismatch");
    const int T = token_count(n_feat);
    MatrixXd m = MatrixXd::Zero(T, 3);
    for (int i = 0; i < n_feat; ++i) m(i / 3, i % 3) = x[i];
    return m;
}

std::vector<int> type4_perm(int T) {
    // out[j] reads flatten(row-major) of the transposed (3,T) matrix:
    // source index 3*(j mod T) + (j div T)
    std::vector<int> perm(std::size_t(3) * T);
    for (int j = 0; j < 3 * T; ++j) perm[j] = 3 * (j % T) + j / T;
    return perm;
}

std::vector<int> type4_perm_inverse(int T) {
    const std::vector<int> fwd = type4_perm(T);
    std::vector<int> inv(fwd.size());
    for (std::size_t j = 0; j < fwd.size(); ++j) inv[fwd[j]] = int(j);
    return inv;
}

std::vector<int> type3_perm(int T) {
    std::vector<int> perm(std::size_t(3) * T);
    for (int t = 0; t < T; ++t) {
        perm[3 * t + 0] = 3 * ((t - 1 + T) % T) + 2;
        perm[3 * t + 1] = 3 * t + 1;
        perm[3 * t + 2] = 3 * ((t + 1) % T) + 0;
    }
    return perm;
}

namespace {

MatrixXd apply_row_perm(const MatrixXd &tokens, const std::vector<int> &perm) {
    const int T = int(tokens.rows());
    MatrixXd out(T, 3);
    for (int j = 0; j < 3 * T; ++j) out(j / 3, j % 3) = tokens(perm[j] / 3, perm[j] % 3);
    return out;
}

} // namespace

MatrixXd type4_mix(const MatrixXd &tokens) {
    return apply_row_perm(tokens, type4_perm(int(tokens.rows())));
}

MatrixXd type3_shift(const MatrixXd &tokens) {
    return apply_row_perm(tokens, type3_perm(int(tokens.rows())));
}

void ModelConfig::validate() const {
    if (depth < 1) throw ConfigError("model.depth must be >= 1");
    if (heads < 1) throw ConfigError("model.heads must be >= 1");
    if (stem_stages < 1) throw ConfigError("model.stem_stages must be >= 1");
    if (task == Task::Classification && n_classes < 2)
        throw ConfigError("model.n_classes must be >= 2 for classification");
    if (ffn_rounds == 0 || ffn_rounds < -1)
        throw ConfigError("model.ffn_rounds must be >= 1");
    if (readout_depth == 0 || readout_depth < -1)
        throw ConfigError("model.readout_depth must be >= 1");
    if (architecture == Arch::Mlp && mlp_hidden.empty() && mlp_target_params < 3)
        throw ConfigError("model.mlp_target_params too small for any MLP");
}

namespace {

int default_ffn_rounds(const ModelConfig &cfg) {
    if (cfg.ffn_rounds > 0) return cfg.ffn_rounds;
    return cfg.architecture == Arch::Qt ? 4 : 3;
}

int default_readout_depth(const ModelConfig &cfg) {
    if (cfg.readout_depth > 0) return cfg.readout_depth;
    return cfg.architecture == Arch::Qt ? 1 : cfg.depth;
}

} // namespace

struct Model::Layout {
    std::vector<Slice> *slices;
    bool declare;
    std::size_t cursor = 0;
    int offset = 0;

    int param(const std::string &name, int len, Slice::Cat cat, Slice::Init init,
              int fan_in = 0) {
        if (declare) {
            slices->push_back({name, offset, len, cat, init, fan_in});
            offset += len;
            return slices->back().offset;
        }
        if (cursor >= slices->size())
            throw ConfigError("model layout replay overran slice table at '" + name + "'");
        const Slice &s = (*slices)[cursor++];
        if (s.name != name || s.len != len)
            throw ConfigError("model layout replay mismatch at '" + name + "'");
        return s.offset;
    }
};

int Model::wire(Tape *t, const VectorXd *x, Layout &L) const {
    const ModelConfig &c = cfg_;
    const int T = T_;
    const int d = c.depth;
    const int width = 3 * T;
    const int out_dim = output_dim();

    if (c.architecture == Arch::Mlp) {
        int u = t ? t->input(*x) : -1;
        int in_dim = n_feat_;
        for (std::size_t i = 0; i < mlp_hidden_resolved_.size(); ++i) {
            const int h = mlp_hidden_resolved_[i];
            const int off = L.param("mlp_dense" + std::to_string(i), (in_dim + 1) * h,
                                    Slice::Cat::LnProj, Slice::Init::FanIn, in_dim);
            if (t) u = t->tanh_op(t->dense(u, off, h, true));
            in_dim = h;
        }
        const int off = L.param("mlp_head", (in_dim + 1) * out_dim, Slice::Cat::LnProj,
                                Slice::Init::FanIn, in_dim);
        return t ? t->dense(u, off, out_dim, true) : -1;
    }

    const std::vector<int> mix_perm =
        c.ffn_connectivity == FfnConnectivity::Type4 ? type4_perm(T) : type3_perm(T);

    // one 3-qubit block per token, each with its own parameters
    auto token_blocks = [&](int in, const std::string &prefix, Slice::Cat cat) -> int {
        std::vector<int> outs;
        for (int tok = 0; tok < T; ++tok) {
            const int off = L.param(prefix + "_t" + std::to_string(tok), 9 * d, cat,
                                    Slice::Init::VqcAngle);
            if (t) outs.push_back(t->vqc_block(t->slice(in, 3 * tok, 3), off, 3, d));
        }
        return t ? t->concat(outs) : -1;
    };

    auto layer_norm = [&](int in, const std::string &name) -> int {
        const int off = L.param(name, 2 * width, Slice::Cat::LnProj, Slice::Init::LnGain);
        return t ? t->layer_norm(in, off) : -1;
    };

    // 3->1 blocks per token, then a T-qubit block (regression) or a dense
    // head (classification)
    auto readout = [&](int in) -> int {
        std::vector<int> scalars;
        for (int tok = 0; tok < T; ++tok) {
            const int off = L.param("readout_t" + std::to_string(tok), 9 * d,
                                    Slice::Cat::Vqc, Slice::Init::VqcAngle);
            if (t)
                scalars.push_back(
                    t->slice(t->vqc_block(t->slice(in, 3 * tok, 3), off, 3, d), 0, 1));
        }
        int s = t ? t->concat(scalars) : -1;
        if (c.task == Task::Regression) {
            const int rd = default_readout_depth(c);
            const int off = L.param("readout_final", 3 * T * rd, Slice::Cat::Vqc,
                                    Slice::Init::VqcAngle);
            return t ? t->slice(t->vqc_block(s, off, T, rd), 0, 1) : -1;
        }
        const int off = L.param("class_head", (T + 1) * out_dim, Slice::Cat::LnProj,
                                Slice::Init::FanIn, T);
        return t ? t->dense(s, off, out_dim, true) : -1;
    };

    int u = t ? t->pad(t->input(*x), width) : -1;

    switch (c.architecture) {
    case Arch::FcVqc: {
        for (int stage = 0; stage < c.stem_stages; ++stage) {
            u = token_blocks(u, "stage" + std::to_string(stage), Slice::Cat::Vqc);
            if (t) u = t->gather(u, mix_perm);
        }
        return readout(u);
    }
    case Arch::ResnetVqc: {
        for (int stage = 0; stage < c.stem_stages; ++stage) {
            int v = token_blocks(u, "stage" + std::to_string(stage), Slice::Cat::Vqc);
            if (t) u = t->gather(t->add(v, u), mix_perm);
        }
        if (c.skip_projection && c.task == Task::Regression) {
            // learned projection skip across the width-changing readout step
            std::vector<int> scalars;
            for (int tok = 0; tok < T; ++tok) {
                const int off = L.param("readout_t" + std::to_string(tok), 9 * d,
                                        Slice::Cat::Vqc, Slice::Init::VqcAngle);
                if (t)
                    scalars.push_back(
                        t->slice(t->vqc_block(t->slice(u, 3 * tok, 3), off, 3, d), 0, 1));
            }
            const int proj = L.param("skip_proj", (width + 1) * T, Slice::Cat::LnProj,
                                     Slice::Init::FanIn, width);
            int s = t ? t->add(t->concat(scalars), t->dense(u, proj, T, true)) : -1;
            const int rd = default_readout_depth(c);
            const int off = L.param("readout_final", 3 * T * rd, Slice::Cat::Vqc,
                                    Slice::Init::VqcAngle);
            return t ? t->slice(t->vqc_block(s, off, T, rd), 0, 1) : -1;
        }
        return readout(u);
    }
    case Arch::Qt: {
        // attention sublayer: per-head Q/K/V from per-token 3-qubit VQCs,
        // classical softmax attention, concat heads, full-width W_O (no bias)
        std::vector<int> head_outs;
        for (int h = 0; h < c.heads; ++h) {
            if (c.attention_enabled) {
                const std::string hs = "_h" + std::to_string(h);
                int q = token_blocks(u, "attn_q" + hs, Slice::Cat::Attn);
                int k = token_blocks(u, "attn_k" + hs, Slice::Cat::Attn);
                int v = token_blocks(u, "attn_v" + hs, Slice::Cat::Attn);
                if (t) head_outs.push_back(t->attention(q, k, v, T, 3));
            } else {
                if (t) head_outs.push_back(u);
            }
        }
        const int wo = L.param("attn_wo", width * c.heads * width, Slice::Cat::LnProj,
                               Slice::Init::FanIn, width * c.heads);
        int a = t ? t->dense(t->concat(head_outs), wo, width, false) : -1;
        int h1 = layer_norm(t ? t->add(u, a) : -1, "ln1");
        int f = h1;
        const int rounds = default_ffn_rounds(c);
        for (int r = 0; r < rounds; ++r) {
            if (t) f = t->gather(f, mix_perm);
            f = token_blocks(f, "ffn_r" + std::to_string(r), Slice::Cat::Vqc);
        }
        int y = layer_norm(t ? t->add(h1, f) : -1, "ln2");
        return readout(y);
    }
    case Arch::Fqt: {
        int stem = token_blocks(u, "stem", Slice::Cat::Vqc);
        int h = stem;
        if (c.attention_enabled) {
            // transpose-and-entangle: feed each feature row of the token
            // matrix into its own T-qubit block, per head
            std::vector<int> branch_outs;
            for (int head = 0; head < c.heads; ++head) {
                int w = t ? t->gather(stem, type4_perm(T)) : -1;
                std::vector<int> rows;
                for (int g = 0; g < 3; ++g) {
                    const int off =
                        L.param("qattn_h" + std::to_string(head) + "_g" + std::to_string(g),
                                3 * T * d, Slice::Cat::Attn, Slice::Init::VqcAngle);
                    if (t) rows.push_back(t->vqc_block(t->slice(w, g * T, T), off, T, d));
                }
                if (t) branch_outs.push_back(t->gather(t->concat(rows), type4_perm_inverse(T)));
            }
            int qa;
            if (c.heads > 1) {
                const int merge = L.param("qattn_merge", width * c.heads * width,
                                          Slice::Cat::LnProj, Slice::Init::FanIn,
                                          width * c.heads);
                qa = t ? t->dense(t->concat(branch_outs), merge, width, false) : -1;
            } else {
                qa = t ? branch_outs[0] : -1;
            }
            h = t ? t->add(stem, qa) : -1;
        }
        if (c.layernorm_enabled) h = layer_norm(h, "ln1");
        int f = h;
        const int rounds = default_ffn_rounds(c);
        for (int r = 0; r < rounds; ++r) {
            if (t) f = t->gather(f, mix_perm);
            f = token_blocks(f, "ffn_r" + std::to_string(r), Slice::Cat::Vqc);
        }
        int y = t ? t->add(h, f) : -1;
        if (c.layernorm_enabled) y = layer_norm(y, "ln2");
        return readout(y);
    }
    default:
        throw ConfigError("wire: unhandled architecture");
    }
}

Model Model::build(const ModelConfig &cfg, int n_feat) {
    cfg.validate();
    if (n_feat < 1) throw ConfigError("model: n_feat must be >= 1");
    Model m;
    m.cfg_ = cfg;
    m.n_feat_ = n_feat;
    m.T_ = token_count(n_feat);
    if (cfg.architecture == Arch::Mlp)
        m.mlp_hidden_resolved_ =
            cfg.mlp_hidden.empty()
                ? mlp_hidden_search(n_feat, m.output_dim(), cfg.mlp_target_params)
                : cfg.mlp_hidden;
    Layout L{&m.slices_, true};
    m.wire(nullptr, nullptr, L);
    m.total_ = L.offset;
    return m;
}

int Model::output_dim() const {
    return cfg_.task == Task::Regression ? 1 : cfg_.n_classes;
}

ParamBreakdown Model::breakdown() const {
    ParamBreakdown b;
    for (const Slice &s : slices_) {
        switch (s.cat) {
        case Slice::Cat::Vqc: b.vqc_params += s.len; break;
        case Slice::Cat::Attn: b.attention_params += s.len; break;
        case Slice::Cat::LnProj: b.ln_proj_params += s.len; break;
        }
    }
    b.total = b.vqc_params + b.attention_params + b.ln_proj_params;
    return b;
}

VectorXd Model::init_params(std::uint64_t seed) const {
    VectorXd p(total_);
    CounterRng root(seed);
    for (std::size_t i = 0; i < slices_.size(); ++i) {
        const Slice &s = slices_[i];
        CounterRng rng = root.stream(i);
        switch (s.init) {
        case Slice::Init::VqcAngle:
            for (int k = 0; k < s.len; ++k)
                p[s.offset + k] = rng.uniform(0.0, 6.283185307179586476925286766559);
            break;
        case Slice::Init::FanIn: {
            const double bound = 1.0 / std::sqrt(double(s.fan_in));
            for (int k = 0; k < s.len; ++k) p[s.offset + k] = rng.uniform(-bound, bound);
            break;
        }
        case Slice::Init::LnGain:
            // first half gains (1), second half shifts (0)
            for (int k = 0; k < s.len; ++k) p[s.offset + k] = k < s.len / 2 ? 1.0 : 0.0;
            break;
        case Slice::Init::LnBias:
        case Slice::Init::Zero:
            for (int k = 0; k < s.len; ++k) p[s.offset + k] = 0.0;
            break;
        }
    }
    return p;
}

int Model::forward(Tape &tape, const VectorXd &x) const {
    if (x.size() != n_feat_)
        throw ConfigError("Model::forward: input feature count mismatch");
    Layout L{const_cast<std::vector<Slice> *>(&slices_), false};
    return wire(&tape, &x, L);
}

ParamBreakdown count_params(const ModelConfig &cfg, int n_feat) {
    return Model::build(cfg, n_feat).breakdown();
}

std::vector<int> mlp_hidden_search(int n_feat, int out_dim, int target_params) {
    auto one = [&](int h) { return (n_feat + 1) * h + (h + 1) * out_dim; };
    auto two = [&](int h1, int h2) {
        return (n_feat + 1) * h1 + (h1 + 1) * h2 + (h2 + 1) * out_dim;
    };
    int best_h = 1;
    long best_diff = std::numeric_limits<long>::max();
    for (int h = 1; h <= 1024; ++h) {
        const long diff = std::labs(long(one(h)) - target_params);
        if (diff < best_diff) {
            best_diff = diff;
            best_h = h;
        }
    }
    // prefer a single hidden layer when it lands within 5% of the budget
    if (best_diff * 20 <= target_params) return {best_h};
    int bh1 = 1, bh2 = 1;
    long best2 = std::numeric_limits<long>::max();
    for (int h1 = 2; h1 <= 256; ++h1)
        for (int h2 = 2; h2 <= h1; ++h2) {
            const long diff = std::labs(long(two(h1, h2)) - target_params);
            if (diff < best2) {
                best2 = diff;
                bh1 = h1;
                bh2 = h2;
            }
        }
    if (best2 < best_diff) return {bh1, bh2};
    return {best_h};
}

} // namespace vqc
