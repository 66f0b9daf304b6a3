#pragma once

#include <cstdint>
#include <vector>

#include "pointcat/tensor.hpp"

namespace pointcat {

// Differentiable primitives. Every op validates shapes, computes its result
// in double precision, records its multiply-accumulate count (see costs.hpp),
// and -- when gradients are enabled and an input requires them -- tapes a
// backward closure with the exact analytic adjoint. Higher-level blocks
// (grouping, attention, heads) are compositions of these, so their gradients
// are exact by construction.

// [n,k] x [k,m] -> [n,m].
tensor matmul(const tensor& a, const tensor& b);

// [n,m] -> [m,n].
tensor transpose(const tensor& x);

// x[n,cin] * W[cin,cout] + b[cout]. Pass a default-constructed tensor for a
// bias-free layer.
tensor linear(const tensor& x, const tensor& w, const tensor& b);

// Elementwise, same shape.
tensor add(const tensor& a, const tensor& b);
tensor sub(const tensor& a, const tensor& b);
tensor mul(const tensor& a, const tensor& b);

// y = c * x and y = x + c for a plain double constant.
tensor scale(const tensor& x, double c);
tensor add_const(const tensor& x, double c);

// Broadcast a one-element tensor s across x: y = x - s, y = x / s.
// Division by zero raises numeric_error.
tensor sub_bscalar(const tensor& x, const tensor& s);
tensor div_bscalar(const tensor& x, const tensor& s);

// Per-channel affine pieces: v has shape [c], x has shape [n,c].
tensor add_rowvec(const tensor& x, const tensor& v);
tensor mul_rowvec(const tensor& x, const tensor& v);

// Repeat a [1,c] row n times -> [n,c]. Backward sums over rows.
tensor broadcast_rows(const tensor& x, std::int64_t n);

// max(0, x). Subgradient at 0 is 0.
tensor relu(const tensor& x);

// Elementwise square root. Negative inputs raise numeric_error; the gradient
// at exactly 0 is defined as 0.
tensor sqrt_elem(const tensor& x);

// Sum of all entries -> shape [1].
tensor sum_all(const tensor& x);

// Mean of all entries -> shape [1].
tensor mean_all(const tensor& x);

// Row-wise softmax on [n,m], computed with max subtraction. Rows sum to 1.
tensor softmax_rows(const tensor& x);

// Per-row layer normalization with population variance and learned affine:
// y = gamma * (x - mean) / sqrt(var + eps) + beta. gamma, beta: [c].
tensor layer_norm(const tensor& x, const tensor& gamma, const tensor& beta, double eps);

// Max over consecutive row blocks of size k: [(n*k),c] -> [n,c]. Ties pick
// the lowest row index, making the op deterministic; the gradient routes each
// output entry to exactly one input entry. If argmax is non-null it receives
// the flat input-row index chosen per (group, channel).
tensor max_pool_groups(const tensor& x, std::int64_t k, std::vector<std::int64_t>* argmax = nullptr);

// Max over all rows: [n,c] -> [1,c].
tensor max_pool_rows(const tensor& x, std::vector<std::int64_t>* argmax = nullptr);

// Mean cross-entropy of logits[n,C] against integer labels (softmax applied
// internally via log-sum-exp). Returns shape [1]. Labels outside [0,C) raise
// index_error.
tensor cross_entropy_mean(const tensor& logits, const std::vector<int>& labels);

// Row gather: out[j,:] = x[idx[j],:]. Backward scatter-adds, so repeated
// indices accumulate. Out-of-range indices raise index_error.
tensor gather_rows(const tensor& x, const std::vector<std::int64_t>& idx);

// Weighted row gather with k terms per output row:
//   out[j,:] = sum_t w[j*k+t] * x[idx[j*k+t],:].
// Weights are constants (not differentiated through).
tensor interpolate_rows(const tensor& x, const std::vector<std::int64_t>& idx,
                        const std::vector<double>& w, std::int64_t k);

// Stack along rows / columns. All parts must agree on the other dimension.
tensor concat_rows(const std::vector<tensor>& parts);
tensor concat_rows(const tensor& a, const tensor& b);
tensor concat_cols(const std::vector<tensor>& parts);
tensor concat_cols(const tensor& a, const tensor& b);

// Contiguous sub-ranges (copies).
tensor slice_rows(const tensor& x, std::int64_t row0, std::int64_t nrows);
tensor slice_cols(const tensor& x, std::int64_t col0, std::int64_t ncols);

}  // namespace pointcat
