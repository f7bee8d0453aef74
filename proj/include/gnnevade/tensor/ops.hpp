#pragma once

#include <span>
#include <vector>

#include "gnnevade/tensor/sparse_adj.hpp"
#include "gnnevade/tensor/tape.hpp"

// Differentiable primitives. Every op records its output on the tape together
// with the local gradient rule. Shapes are never broadcast; a mismatch throws
// ShapeError.
namespace gnnevade::tensor {

Var matmul(Tape& tape, Var a, Var b);
/// a * b for a constant sparse `a`, which must outlive the tape.
Var sparse_matmul(Tape& tape, const SparseMatrix& a, Var b);
Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double factor);

/// x + 1 * bias, where bias is 1 x cols.
Var add_row_bias(Tape& tape, Var x, Var bias);

/// s * x for a 1x1 variable s.
Var scale_by(Tape& tape, Var x, Var s);

/// Elementwise max(0, x); the subgradient at 0 is 0.
Var relu(Tape& tape, Var x);

/// Elementwise product with a constant matrix (dropout masks).
Var mul_constant(Tape& tape, Var x, const DenseMatrix& mask);

/// rows x.cols matrix holding x.row(rows[i]).
Var gather_rows(Tape& tape, Var x, std::span<const int> rows);

/// Copy of base with delta.row(i) added to row rows[i]; rows must be distinct.
Var scatter_add_rows(Tape& tape, Var base, std::span<const int> rows, Var delta);

Var sum(Tape& tape, Var x);
Var sum_squares(Tape& tape, Var x);

/// Mean over `rows` of -log softmax(logits.row(r))[label]. Labels must be
/// valid class ids (IndexError otherwise).
Var cross_entropy(Tape& tape, Var logits, std::span<const int> rows, std::span<const int> labels);

/// out[v] = sum over entries (u -> v) of norm_e * weight_e * h[u].
/// With no `norm`, every coefficient is 1. Gradients reach h, the adjacency's
/// weight slots and the coefficients.
Var spmm_agg(Tape& tape, const SparseWeightedAdj& adj, Var h, std::optional<Var> norm = std::nullopt);

/// Per-entry 1 / sqrt(d_src * d_dst) where d_x = offset_x + sum of weights of
/// entries into x (the unit self-loop entry included). Differentiable in the
/// weight slots.
Var gcn_norm(Tape& tape, const SparseWeightedAdj& adj);

/// Per-entry 1 / s_dst with s_x the summed weight into x; 0 where s_x = 0.
Var mean_norm(Tape& tape, const SparseWeightedAdj& adj);

/// Row-wise softmax (not recorded).
DenseMatrix softmax_rows(const DenseMatrix& logits);

}  // namespace gnnevade::tensor
