#include "gnnevade/tensor/ops.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::tensor {

namespace {

std::string dims(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
}

void check_rows(std::span<const int> rows, Eigen::Index limit, const char* op) {
    for (int r : rows)
        if (r < 0 || r >= limit)
            throw IndexError(std::string(op) + ": row " + std::to_string(r) + " out of range");
}

}  // namespace

Var matmul(Tape& tape, Var a, Var b) {
    const DenseMatrix& av = tape.value(a);
    const DenseMatrix& bv = tape.value(b);
    if (av.cols() != bv.rows())
        throw ShapeError("matmul: " + dims(av) + " times " + dims(bv));
    DenseMatrix out = av * bv;
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
        if (t.requires_grad(a)) t.grad_accumulator(a).noalias() += g * t.value(b).transpose();
        if (t.requires_grad(b)) t.grad_accumulator(b).noalias() += t.value(a).transpose() * g;
    });
}

Var sparse_matmul(Tape& tape, const SparseMatrix& a, Var b) {
    const DenseMatrix& bv = tape.value(b);
    if (a.cols() != bv.rows())
        throw ShapeError("sparse_matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         dims(bv));
    DenseMatrix out = a * bv;
    return tape.record(std::move(out), {b}, [&a, b](Tape& t, const DenseMatrix& g) {
        t.grad_accumulator(b).noalias() += a.transpose() * g;
    });
}

Var add(Tape& tape, Var a, Var b) {
    require_same_shape(tape.value(a), tape.value(b), "add");
    DenseMatrix out = tape.value(a) + tape.value(b);
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
        if (t.requires_grad(a)) t.grad_accumulator(a) += g;
        if (t.requires_grad(b)) t.grad_accumulator(b) += g;
    });
}

Var scale(Tape& tape, Var x, double factor) {
    DenseMatrix out = tape.value(x) * factor;
    return tape.record(std::move(out), {x}, [x, factor](Tape& t, const DenseMatrix& g) {
        t.grad_accumulator(x) += factor * g;
    });
}

Var add_row_bias(Tape& tape, Var x, Var bias) {
    const DenseMatrix& xv = tape.value(x);
    const DenseMatrix& bv = tape.value(bias);
    if (bv.rows() != 1 || bv.cols() != xv.cols())
        throw ShapeError("add_row_bias: bias " + dims(bv) + " for input " + dims(xv));
    DenseMatrix out = xv;
    out.rowwise() += bv.row(0);
    return tape.record(std::move(out), {x, bias}, [x, bias](Tape& t, const DenseMatrix& g) {
        if (t.requires_grad(x)) t.grad_accumulator(x) += g;
        if (t.requires_grad(bias)) t.grad_accumulator(bias) += g.colwise().sum();
    });
}

Var scale_by(Tape& tape, Var x, Var s) {
    const DenseMatrix& sv = tape.value(s);
    if (sv.rows() != 1 || sv.cols() != 1) throw ShapeError("scale_by: factor must be 1x1");
    DenseMatrix out = tape.value(x) * sv(0, 0);
    return tape.record(std::move(out), {x, s}, [x, s](Tape& t, const DenseMatrix& g) {
        if (t.requires_grad(x)) t.grad_accumulator(x) += t.value(s)(0, 0) * g;
        if (t.requires_grad(s)) t.grad_accumulator(s)(0, 0) += g.cwiseProduct(t.value(x)).sum();
    });
}

Var relu(Tape& tape, Var x) {
    DenseMatrix out = tape.value(x).cwiseMax(0.0);
    return tape.record(std::move(out), {x}, [x](Tape& t, const DenseMatrix& g) {
        const DenseMatrix& xv = t.value(x);
        t.grad_accumulator(x) += (xv.array() > 0.0).select(g, 0.0);
    });
}

Var mul_constant(Tape& tape, Var x, const DenseMatrix& mask) {
    require_same_shape(tape.value(x), mask, "mul_constant");
    DenseMatrix out = tape.value(x).cwiseProduct(mask);
    auto m = std::make_shared<const DenseMatrix>(mask);
    return tape.record(std::move(out), {x}, [x, m](Tape& t, const DenseMatrix& g) {
        t.grad_accumulator(x) += g.cwiseProduct(*m);
    });
}

Var gather_rows(Tape& tape, Var x, std::span<const int> rows) {
    const DenseMatrix& xv = tape.value(x);
    check_rows(rows, xv.rows(), "gather_rows");
    DenseMatrix out(static_cast<Eigen::Index>(rows.size()), xv.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = xv.row(rows[i]);
    std::vector<int> idx(rows.begin(), rows.end());
    return tape.record(std::move(out), {x}, [x, idx](Tape& t, const DenseMatrix& g) {
        DenseMatrix& gx = t.grad_accumulator(x);
        for (std::size_t i = 0; i < idx.size(); ++i) gx.row(idx[i]) += g.row(i);
    });
}

Var scatter_add_rows(Tape& tape, Var base, std::span<const int> rows, Var delta) {
    const DenseMatrix& bv = tape.value(base);
    const DenseMatrix& dv = tape.value(delta);
    if (dv.rows() != static_cast<Eigen::Index>(rows.size()) || dv.cols() != bv.cols())
        throw ShapeError("scatter_add_rows: delta " + dims(dv) + " for base " + dims(bv));
    check_rows(rows, bv.rows(), "scatter_add_rows");
    DenseMatrix out = bv;
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) += dv.row(i);
    std::vector<int> idx(rows.begin(), rows.end());
    return tape.record(std::move(out), {base, delta}, [base, delta, idx](Tape& t, const DenseMatrix& g) {
        if (t.requires_grad(base)) t.grad_accumulator(base) += g;
        if (t.requires_grad(delta)) {
            DenseMatrix& gd = t.grad_accumulator(delta);
            for (std::size_t i = 0; i < idx.size(); ++i) gd.row(i) += g.row(idx[i]);
        }
    });
}

Var sum(Tape& tape, Var x) {
    DenseMatrix out(1, 1);
    out(0, 0) = tape.value(x).sum();
    return tape.record(std::move(out), {x}, [x](Tape& t, const DenseMatrix& g) {
        t.grad_accumulator(x).array() += g(0, 0);
    });
}

Var sum_squares(Tape& tape, Var x) {
    DenseMatrix out(1, 1);
    out(0, 0) = tape.value(x).squaredNorm();
    return tape.record(std::move(out), {x}, [x](Tape& t, const DenseMatrix& g) {
        t.grad_accumulator(x) += (2.0 * g(0, 0)) * t.value(x);
    });
}

Var cross_entropy(Tape& tape, Var logits, std::span<const int> rows, std::span<const int> labels) {
    const DenseMatrix& z = tape.value(logits);
    if (rows.size() != labels.size()) throw ShapeError("cross_entropy: rows/labels length differ");
    if (rows.empty()) throw ShapeError("cross_entropy: no rows selected");
    check_rows(rows, z.rows(), "cross_entropy");
    for (int y : labels)
        if (y < 0 || y >= z.cols())
            throw IndexError("cross_entropy: label " + std::to_string(y) + " outside " +
                             std::to_string(z.cols()) + " classes");
    const double inv_m = 1.0 / static_cast<double>(rows.size());
    DenseMatrix probs(static_cast<Eigen::Index>(rows.size()), z.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = z.row(rows[i]);
        const double peak = row.maxCoeff();
        const auto shifted = (row.array() - peak).exp();
        const double denom = shifted.sum();
        probs.row(i) = shifted / denom;
        total += (std::log(denom) + peak) - row(labels[i]);
    }
    DenseMatrix out(1, 1);
    out(0, 0) = total * inv_m;
    std::vector<int> r(rows.begin(), rows.end());
    std::vector<int> y(labels.begin(), labels.end());
    return tape.record(std::move(out), {logits},
                       [logits, r, y, inv_m, probs = std::move(probs)](Tape& t, const DenseMatrix& g) {
                           DenseMatrix& gz = t.grad_accumulator(logits);
                           const double s = g(0, 0) * inv_m;
                           for (std::size_t i = 0; i < r.size(); ++i) {
                               gz.row(r[i]) += s * probs.row(i);
                               gz(r[i], y[i]) -= s;
                           }
                       });
}

Var spmm_agg(Tape& tape, const SparseWeightedAdj& adj, Var h, std::optional<Var> norm) {
    const DenseMatrix& hv = tape.value(h);
    if (static_cast<std::size_t>(hv.rows()) != adj.num_nodes())
        throw ShapeError("spmm_agg: adjacency over " + std::to_string(adj.num_nodes()) +
                         " nodes, features " + dims(hv));
    const auto& entries = adj.entries();
    if (norm) {
        const DenseMatrix& nv = tape.value(*norm);
        if (nv.rows() != static_cast<Eigen::Index>(entries.size()) || nv.cols() != 1)
            throw ShapeError("spmm_agg: coefficient vector must be entries x 1");
    }
    if (adj.weights()) {
        const DenseMatrix& wv = tape.value(*adj.weights());
        if (wv.rows() != static_cast<Eigen::Index>(adj.num_slots()) || wv.cols() != 1)
            throw ShapeError("spmm_agg: weight vector must be slots x 1");
    }
    DenseMatrix out = DenseMatrix::Zero(hv.rows(), hv.cols());
    const std::vector<double> weights = adj.entry_weights(tape);
    const DenseMatrix* nv = norm ? &tape.value(*norm) : nullptr;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const AdjEntry& en = entries[e];
        const double c = (nv ? (*nv)(e, 0) : 1.0) * weights[e];
        if (c != 0.0) out.row(en.dst) += c * hv.row(en.src);
    }
    auto fn = [a = adj, h, norm, weights](Tape& t, const DenseMatrix& g) {
        const DenseMatrix& hv = t.value(h);
        const bool want_h = t.requires_grad(h);
        const bool want_w = a.weights() && t.requires_grad(*a.weights());
        const bool want_n = norm && t.requires_grad(*norm);
        DenseMatrix* gh = want_h ? &t.grad_accumulator(h) : nullptr;
        DenseMatrix* gw = want_w ? &t.grad_accumulator(*a.weights()) : nullptr;
        DenseMatrix* gn = want_n ? &t.grad_accumulator(*norm) : nullptr;
        const DenseMatrix* nv = norm ? &t.value(*norm) : nullptr;
        const auto& entries = a.entries();
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const AdjEntry& en = entries[e];
            const double nrm = nv ? (*nv)(e, 0) : 1.0;
            const double w = weights[e];
            if (gh) gh->row(en.src) += (nrm * w) * g.row(en.dst);
            if (gw || gn) {
                const double dot = g.row(en.dst).dot(hv.row(en.src));
                if (gw && en.slot != AdjEntry::kUnitWeight) (*gw)(en.slot, 0) += nrm * dot;
                if (gn) (*gn)(e, 0) += w * dot;
            }
        }
    };
    if (norm && adj.weights()) return tape.record(std::move(out), {h, *norm, *adj.weights()}, fn);
    if (norm) return tape.record(std::move(out), {h, *norm}, fn);
    if (adj.weights()) return tape.record(std::move(out), {h, *adj.weights()}, fn);
    return tape.record(std::move(out), {h}, fn);
}

namespace {

Var degree_based_norm(Tape& tape, const SparseWeightedAdj& adj, bool symmetric) {
    const auto& entries = adj.entries();
    const std::size_t n = adj.num_nodes();
    std::vector<double> degree(n);
    for (std::size_t i = 0; i < n; ++i) degree[i] = symmetric ? adj.degree_offset(i) : 0.0;
    const std::vector<double> weights = adj.entry_weights(tape);
    for (std::size_t e = 0; e < entries.size(); ++e) degree[entries[e].dst] += weights[e];
    DenseMatrix out(static_cast<Eigen::Index>(entries.size()), 1);
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const AdjEntry& en = entries[e];
        if (symmetric) {
            const double d = degree[en.src] * degree[en.dst];
            if (!(d > 0.0)) throw Error("gcn_norm: non-positive degree");
            out(e, 0) = 1.0 / std::sqrt(d);
        } else {
            out(e, 0) = degree[en.dst] > 0.0 ? 1.0 / degree[en.dst] : 0.0;
        }
    }
    auto fn = [a = adj, degree, symmetric, out](Tape& t, const DenseMatrix& g) {
        const auto& entries = a.entries();
        std::vector<double> d_degree(degree.size(), 0.0);
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const AdjEntry& en = entries[e];
            const double c = out(e, 0);
            if (symmetric) {
                d_degree[en.src] += g(e, 0) * (-0.5 * c / degree[en.src]);
                d_degree[en.dst] += g(e, 0) * (-0.5 * c / degree[en.dst]);
            } else if (degree[en.dst] > 0.0) {
                d_degree[en.dst] += g(e, 0) * (-c * c);
            }
        }
        DenseMatrix& gw = t.grad_accumulator(*a.weights());
        for (const AdjEntry& en : entries)
            if (en.slot != AdjEntry::kUnitWeight) gw(en.slot, 0) += d_degree[en.dst];
    };
    if (adj.weights()) return tape.record(std::move(out), {*adj.weights()}, fn);
    return tape.leaf(std::move(out));
}

}  // namespace

Var gcn_norm(Tape& tape, const SparseWeightedAdj& adj) { return degree_based_norm(tape, adj, true); }

Var mean_norm(Tape& tape, const SparseWeightedAdj& adj) { return degree_based_norm(tape, adj, false); }

DenseMatrix softmax_rows(const DenseMatrix& logits) {
    DenseMatrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const auto shifted = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
        out.row(i) = shifted / shifted.sum();
    }
    return out;
}

}  // namespace gnnevade::tensor
