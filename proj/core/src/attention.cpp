#include "pointcat/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pointcat/costs.hpp"
#include "pointcat/ops.hpp"

namespace pointcat {

namespace {

// Re-gathers rows in lexicographic value order. Single-query attention has no
// positional encoding, so its output must not depend on the key/value row
// order -- including at the bit level, which requires the reductions (softmax
// sum, weighted value sum) to always run in one canonical order. Ties are
// exact duplicate rows, whose contributions commute bit-exactly.
tensor canonical_value_order(const tensor& x) {
    const std::int64_t n = x.rows();
    const std::int64_t c = x.cols();
    const std::vector<double>& v = x.values();
    std::vector<std::int64_t> ord(static_cast<std::size_t>(n));
    std::iota(ord.begin(), ord.end(), std::int64_t{0});
    std::stable_sort(ord.begin(), ord.end(), [&](std::int64_t a, std::int64_t b) {
        const double* ra = v.data() + a * c;
        const double* rb = v.data() + b * c;
        return std::lexicographical_compare(ra, ra + c, rb, rb + c);
    });
    bool identity = true;
    for (std::int64_t i = 0; i < n; ++i)
        if (ord[static_cast<std::size_t>(i)] != i) { identity = false; break; }
    return identity ? x : gather_rows(x, ord);
}

// Multi-head attention of queries q [nq, c] over a sequence seq [m, c].
// Scores use 1/sqrt(d_k) scaling; the "scores" cost scope isolates the
// q-by-key multiplications so single-query vs all-queries budgets can be
// compared exactly.
tensor multi_head_attention(const tensor& q_rows, const tensor& seq, const parameter& wq,
                            const parameter& wk, const parameter& wv, std::int64_t heads,
                            std::vector<tensor>* attn_weights) {
    const std::int64_t c = seq.cols();
    if (heads < 1 || c % heads != 0)
        throw shape_error("attention: width " + std::to_string(c) + " not divisible by heads=" +
                          std::to_string(heads));
    const std::int64_t dk = c / heads;

    tensor q_all = matmul(q_rows, wq.value);
    tensor k_all = matmul(seq, wk.value);
    tensor v_all = matmul(seq, wv.value);

    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
    std::vector<tensor> head_outputs;
    head_outputs.reserve(static_cast<std::size_t>(heads));
    for (std::int64_t h = 0; h < heads; ++h) {
        tensor qh = slice_cols(q_all, h * dk, dk);
        tensor kh = slice_cols(k_all, h * dk, dk);
        tensor vh = slice_cols(v_all, h * dk, dk);
        tensor scores;
        {
            cost_scope scope("scores");
            scores = matmul(qh, transpose(kh));
        }
        tensor weights = softmax_rows(scale(scores, inv_sqrt_dk));
        if (attn_weights) attn_weights->push_back(weights);
        head_outputs.push_back(matmul(weights, vh));
    }
    return heads == 1 ? head_outputs[0] : concat_cols(head_outputs);
}

}  // namespace

branch_tokens append_class_token(const branch_features& feats, const parameter& cls) {
    if (!cls.value.defined() || cls.value.rank() != 2 || cls.value.rows() != 1)
        throw shape_error("append_class_token: class token must be [1,c]");
    if (feats.tokens.defined() && feats.tokens.cols() != cls.value.cols())
        throw shape_error("append_class_token: patch width " + std::to_string(feats.tokens.cols()) +
                          " != class token width " + std::to_string(cls.value.cols()));
    return branch_tokens{cls.value, feats.tokens};
}

branch_tokens cross_attention_step(const branch_tokens& self, const branch_tokens& other,
                                   const cross_attention_params& p, double eps,
                                   std::vector<tensor>* attn_weights) {
    tensor q_tok = layer_norm(linear(self.cls, p.proj_in.w.value, p.proj_in.b.value),
                              p.ln_in.gamma.value, p.ln_in.beta.value, eps);
    const bool have_patch = other.patch.defined() && other.patch.rows() > 0;
    tensor seq = have_patch ? concat_rows(q_tok, canonical_value_order(other.patch)) : q_tok;

    tensor attn = multi_head_attention(q_tok, seq, p.wq, p.wk, p.wv, p.heads, attn_weights);
    if (p.use_out_proj) attn = linear(attn, p.out_proj.w.value, p.out_proj.b.value);
    tensor tok = add(attn, q_tok);

    branch_tokens out;
    out.cls = layer_norm(linear(tok, p.proj_out.w.value, p.proj_out.b.value), p.ln_out.gamma.value,
                         p.ln_out.beta.value, eps);
    out.patch = self.patch;
    return out;
}

branch_tokens msa_layer(const branch_tokens& tokens, const msa_params& p,
                        std::vector<tensor>* attn_weights) {
    const bool have_patch = tokens.patch.defined() && tokens.patch.rows() > 0;
    tensor seq = have_patch ? concat_rows(tokens.cls, tokens.patch) : tokens.cls;

    tensor attn = multi_head_attention(seq, seq, p.wq, p.wk, p.wv, p.heads, attn_weights);
    if (p.use_out_proj) attn = linear(attn, p.out_proj.w.value, p.out_proj.b.value);
    tensor out_seq = add(attn, seq);

    branch_tokens out;
    out.cls = slice_rows(out_seq, 0, 1);
    out.patch = have_patch ? slice_rows(out_seq, 1, out_seq.rows() - 1) : tokens.patch;
    return out;
}

branch_tokens msa_ffn_block(const branch_tokens& tokens, const ffn_params& p, double eps) {
    const bool have_patch = tokens.patch.defined() && tokens.patch.rows() > 0;
    tensor seq = have_patch ? concat_rows(tokens.cls, tokens.patch) : tokens.cls;
    tensor u = layer_norm(seq, p.ln.gamma.value, p.ln.beta.value, eps);
    tensor f = linear(relu(linear(u, p.fc1.w.value, p.fc1.b.value)), p.fc2.w.value, p.fc2.b.value);
    tensor out_seq = add(seq, f);

    branch_tokens out;
    out.cls = slice_rows(out_seq, 0, 1);
    out.patch = have_patch ? slice_rows(out_seq, 1, out_seq.rows() - 1) : tokens.patch;
    return out;
}

dual_tokens run_stack(const dual_tokens& input, const attention_stack_params& p) {
    dual_tokens state = input;
    if (p.depth() < 1) throw shape_error("run_stack: empty layer stack");
    if (p.kind == attention_kind::cross) {
        for (std::size_t l = 0; l < p.cross_layers.size(); ++l) {
            cost_scope layer_scope("layer" + std::to_string(l));
            const cross_layer_params& lp = p.cross_layers[l];
            // Synchronous: both directions read the previous layer's state.
            branch_tokens next_large, next_small;
            {
                cost_scope dir("attend_small");  // large cls reads small patches
                next_large = cross_attention_step(state.large, state.small, lp.large_dir, p.eps);
            }
            {
                cost_scope dir("attend_large");  // small cls reads large patches
                next_small = cross_attention_step(state.small, state.large, lp.small_dir, p.eps);
            }
            state.large = next_large;
            state.small = next_small;
        }
    } else {
        for (std::size_t l = 0; l < p.msa_layers.size(); ++l) {
            cost_scope layer_scope("layer" + std::to_string(l));
            const msa_layer_params& lp = p.msa_layers[l];
            {
                cost_scope dir("attend_large");
                state.large = msa_ffn_block(msa_layer(state.large, lp.large_msa), lp.large_ffn, p.eps);
            }
            {
                cost_scope dir("attend_small");
                state.small = msa_ffn_block(msa_layer(state.small, lp.small_msa), lp.small_ffn, p.eps);
            }
        }
    }
    return state;
}

}  // namespace pointcat
