#pragma once

#include <cstdint>
#include <vector>

#include "pointcat/grouping.hpp"
#include "pointcat/tensor.hpp"

namespace pointcat {

// A branch's token sequence, kept as [class token; patch tokens] parts.
struct branch_tokens {
    tensor cls;    // [1, c]
    tensor patch;  // [n, c]
};

struct linear_params {
    parameter w;
    parameter b;
};

struct norm_params {
    parameter gamma;
    parameter beta;
};

// Parameters of one cross-attention direction (self's class token reads the
// other branch's patch tokens). Layer inventory is exactly: entry projection
// with norm, the three attention matrices, the optional head-merge projection,
// and the back-projection with norm. No feed-forward network.
struct cross_attention_params {
    linear_params proj_in;   // c_self -> c_other
    norm_params ln_in;
    parameter wq, wk, wv;    // [c_other, c_other], bias-free
    linear_params out_proj;  // head merge, c_other -> c_other (optional)
    bool use_out_proj = true;
    linear_params proj_out;  // c_other -> c_self
    norm_params ln_out;
    std::int64_t heads = 1;
};

// Attaches a trained class token in front of patch tokens.
branch_tokens append_class_token(const branch_features& feats, const parameter& cls);

// One directional cross-attention update:
//   q_tok = LN(Linear(self.cls))         at the other branch's width
//   seq   = [q_tok; other.patch]
//   attn  = multi-head attention with the single query q_tok over seq
//   tok   = attn + q_tok                  (residual)
//   cls'  = LN(Linear(tok))               back at self's width
// Patch tokens pass through untouched. The other branch's rows are processed
// in a canonical (value-sorted) order internally, so the output cls token is
// bit-identical under any permutation of other.patch -- there is no position
// information anywhere. If attn_weights is non-null it receives one
// [1, seq_len] weight row per head (in the canonical key order).
branch_tokens cross_attention_step(const branch_tokens& self, const branch_tokens& other,
                                   const cross_attention_params& p, double eps,
                                   std::vector<tensor>* attn_weights = nullptr);

// Baseline self-attention parameters (no entry/back projections).
struct msa_params {
    parameter wq, wk, wv;
    linear_params out_proj;
    bool use_out_proj = true;
    std::int64_t heads = 1;
};

// Full self-attention over [cls; patch] with a residual add and no
// feed-forward network. Every token is a query.
branch_tokens msa_layer(const branch_tokens& tokens, const msa_params& p,
                        std::vector<tensor>* attn_weights = nullptr);

// Feed-forward block used by the baseline *model* around msa_layer
// (pre-norm residual: t += fc2(relu(fc1(LN(t)))) applied to the sequence).
// The cross-attention path has no counterpart to this block.
struct ffn_params {
    norm_params ln;
    linear_params fc1;  // c -> ffn_dim
    linear_params fc2;  // ffn_dim -> c
};

branch_tokens msa_ffn_block(const branch_tokens& tokens, const ffn_params& p, double eps);

enum class attention_kind { cross, self_baseline };

struct cross_layer_params {
    cross_attention_params large_dir;  // self = large branch
    cross_attention_params small_dir;  // self = small branch
};

struct msa_layer_params {
    msa_params large_msa;
    msa_params small_msa;
    ffn_params large_ffn;
    ffn_params small_ffn;
};

struct attention_stack_params {
    attention_kind kind = attention_kind::cross;
    double eps = 1e-5;
    std::vector<cross_layer_params> cross_layers;
    std::vector<msa_layer_params> msa_layers;

    std::int64_t depth() const {
        return static_cast<std::int64_t>(kind == attention_kind::cross ? cross_layers.size()
                                                                       : msa_layers.size());
    }
};

struct dual_tokens {
    branch_tokens large;
    branch_tokens small;
};

// Runs the L-layer stack. Cross mode updates both directions synchronously
// (each reads the previous layer's opposite branch). Baseline mode runs
// independent per-branch self-attention plus the feed-forward block.
dual_tokens run_stack(const dual_tokens& input, const attention_stack_params& p);

}  // namespace pointcat
