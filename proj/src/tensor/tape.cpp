#include "gnnevade/tensor/tape.hpp"

#include <atomic>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::tensor {

namespace {
std::atomic<std::uint64_t> next_tape_id{1};
}

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

Var Tape::leaf(DenseMatrix value, bool requires_grad) {
    if (!value.allFinite()) throw Error("non-finite value recorded on tape");
    nodes_.push_back(Node{std::move(value), {}, requires_grad, {}});
    return Var{id_, nodes_.size() - 1};
}

Var Tape::record(DenseMatrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
    if (!value.allFinite()) throw Error("op produced a non-finite value");
    bool needs = false;
    for (const Var& in : inputs) needs = needs || node(in).requires_grad;
    nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(fn) : BackwardFn{}});
    return Var{id_, nodes_.size() - 1};
}

bool Tape::owns(Var v) const noexcept { return v.tape_id == id_ && v.index < nodes_.size(); }

const Tape::Node& Tape::node(Var v) const {
    if (!owns(v)) throw IndexError("variable is not registered on this tape");
    return nodes_[v.index];
}

Tape::Node& Tape::node(Var v) {
    if (!owns(v)) throw IndexError("variable is not registered on this tape");
    return nodes_[v.index];
}

const DenseMatrix& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var loss) {
    const Node& root = node(loss);
    if (root.value.rows() != 1 || root.value.cols() != 1)
        throw ShapeError("backward() needs a 1x1 loss, got " + std::to_string(root.value.rows()) +
                         "x" + std::to_string(root.value.cols()));
    for (Node& n : nodes_) n.grad.resize(0, 0);
    if (!root.requires_grad) return;
    nodes_[loss.index].grad = DenseMatrix::Ones(1, 1);
    for (std::size_t i = loss.index + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || n.grad.size() == 0) continue;
        // The closure may accumulate into earlier nodes only, so `n` stays valid.
        const DenseMatrix upstream = n.grad;
        n.backward(*this, upstream);
    }
}

DenseMatrix Tape::grad(Var v) const {
    const Node& n = node(v);
    if (n.grad.size() == 0) return DenseMatrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

DenseMatrix& Tape::grad_accumulator(Var v) {
    Node& n = node(v);
    if (n.grad.size() == 0) n.grad = DenseMatrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

}  // namespace gnnevade::tensor
