#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace gnnevade::tensor {

/// Row-major float64 matrix. Every value on a tape is one of these; scalars
/// are 1x1 and vectors are explicit n x 1 or 1 x n.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Constant sparse matrix (feature matrices of sparse datasets).
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Handle to a value recorded on a Tape.
struct Var {
    std::uint64_t tape_id = 0;
    std::size_t index = 0;
};

/// Reverse-mode tape. Values are appended in evaluation order, so the
/// recording order is a topological order and backward() is a single reverse
/// sweep. A tape belongs to one task; it is not thread-safe.
class Tape {
public:
    /// Receives the upstream gradient of the node being visited.
    using BackwardFn = std::function<void(Tape&, const DenseMatrix& upstream)>;

    Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) noexcept = default;
    Tape& operator=(Tape&&) noexcept = default;

    Var leaf(DenseMatrix value, bool requires_grad = false);

    /// Records an op output. The node requires a gradient iff any input does;
    /// `fn` is dropped otherwise.
    Var record(DenseMatrix value, std::initializer_list<Var> inputs, BackwardFn fn);

    const DenseMatrix& value(Var v) const;
    bool requires_grad(Var v) const;
    bool owns(Var v) const noexcept;
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Runs the reverse sweep from a 1x1 loss. Gradients from a previous call
    /// are discarded first.
    void backward(Var loss);

    /// Gradient of the last backward() loss with respect to `v`; zeros when
    /// `v` is not on any path to the loss. Throws IndexError for a foreign Var.
    DenseMatrix grad(Var v) const;

    /// Accumulator used by op implementations during backward().
    DenseMatrix& grad_accumulator(Var v);

private:
    struct Node {
        DenseMatrix value;
        DenseMatrix grad;  // empty until first accumulation
        bool requires_grad = false;
        BackwardFn backward;
    };

    const Node& node(Var v) const;
    Node& node(Var v);

    std::uint64_t id_;
    std::vector<Node> nodes_;
};

}  // namespace gnnevade::tensor
