#pragma once

#include <vector>

#include "farm/nn/tape.hpp"

namespace farm::nn {

Var matmul(const Var& a, const Var& b);
/// x W + b with W (in x out) and b (1 x out).
Var linear(const Var& x, const Var& weight, const Var& bias);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// a + row, broadcasting a 1 x C row over all rows of a.
Var add_row(const Var& a, const Var& row);
/// a * row elementwise, broadcasting the row.
Var mul_row(const Var& a, const Var& row);
/// (1 + scale) * x + shift with 1 x C rows.
Var modulate(const Var& x, const Var& shift, const Var& scale);

/// x / sqrt(mean(x^2) + eps) per row.
Var rms_norm(const Var& x, double eps = 1e-6);
/// (x - mean) / sqrt(var + eps) per row, no affine.
Var layer_norm(const Var& x, double eps = 1e-6);

Var gelu(const Var& x);
Var silu(const Var& x);
Var softmax_rows(const Var& x);

/// Pairwise rotation of adjacent features: y[2j] = x[2j] c - x[2j+1] s,
/// y[2j+1] = x[2j+1] c + x[2j] s, with per-pair tables of shape N x D/2.
Var rope(const Var& x, const Matrix& cos_pairs, const Matrix& sin_pairs);

Var slice_cols(const Var& x, Index start, Index count);
Var slice_rows(const Var& x, Index start, Index count);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
/// out[i] = x[index[i]]; gradients scatter-add back.
Var gather_rows(const Var& x, const std::vector<int>& index);

/// Multi-head softmax(q k^T * scale) v over column blocks of width D / heads.
Var attention(const Var& q, const Var& k, const Var& v, int heads, double scale);

/// Per-head attention probabilities, for inspection.
std::vector<Matrix> attention_probabilities(const Matrix& q, const Matrix& k, int heads, double scale);
/// Per-head pre-softmax logits.
std::vector<Matrix> attention_logits(const Matrix& q, const Matrix& k, int heads, double scale);

Var sum(const Var& x);
Var mean_squares(const Var& x);

}  // namespace farm::nn
