#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2bench/tensor.hpp"

namespace p2bench::ad {

// Thrown when a forward pass produces NaN/Inf or an op sees bad shapes.
struct TapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
    Constant,
    Leaf,
    MatMul,        // a(n,k) * b(k,m)
    MatMulNT,      // a(n,k) * b(m,k)^T
    Add,           // same shape, or b is a 1xc row broadcast over rows of a
    Sub,           // same shape
    Mul,           // same shape, or either side 1x1 scalar
    Scale,         // a * c
    AddConst,      // a + c
    Relu,
    Sigmoid,
    Softplus,
    Exp,
    Log,
    MaxConst,      // max(a, c) elementwise
    MinConst,      // min(a, c) elementwise
    LogSumExpRows, // (n,k) -> (n,1), max-stabilized
    SumRows,       // (n,k) -> (n,1)
    GatherRows,    // table (K,h), indices (n) -> (n,h)
    TakePerRow,    // a (n,K), indices (n) -> (n,1), picks a[i, idx[i]]
    ConcatCols,    // (n,a) ++ (n,b) -> (n,a+b)
    ConcatRows,    // (a,c) ++ (b,c) -> (a+b,c)
    SumAll,        // -> (1,1)
    MeanAll,       // -> (1,1)
};

// One reverse-mode computation. Nodes are appended in evaluation order, so a
// reverse sweep is a valid topological backward pass. A Tape instance is
// single-threaded; independent tapes may run concurrently.
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var constant(Tensor value);
    // Gradient-tracked leaf. Non-trainable leaves behave as constants: the
    // gradient read back for them is exactly zero.
    Var leaf(Tensor value, bool trainable = true);

    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var add_const(Var a, double c);
    Var neg(Var a);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var softplus(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var max_const(Var a, double c);
    Var min_const(Var a, double c);
    Var clamp(Var a, double lo, double hi) { return min_const(max_const(a, lo), hi); }
    Var logsumexp_rows(Var a);
    Var sum_rows(Var a);
    Var gather_rows(Var table, std::vector<int> idx);
    Var take_per_row(Var a, std::vector<int> idx);
    Var concat_cols(Var a, Var b);
    Var concat_rows(Var a, Var b);
    Var sum_all(Var a);
    Var mean_all(Var a);

    const Tensor& value(Var v) const { return nodes_[check(v)].val; }
    double scalar_value(Var v) const;

    // Reverse sweep from a scalar output. May be called once per tape.
    void backward(Var out);

    // Zero tensor until backward has run; always zero for constants and
    // non-trainable leaves.
    const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Op op;
        int a = -1, b = -1;
        double c = 0.0;
        std::vector<int> idx;
        Tensor val;
        Tensor grad;
        bool trainable = false;
    };

    std::vector<Node> nodes_;
    bool backward_done_ = false;

    int check(Var v) const;
    Var push(Node n);
    const Tensor& in(Var v) const { return nodes_[check(v)].val; }
    // whether backward should write a gradient into this node
    bool wants_grad(int id) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.op == Op::Constant) return false;
        if (n.op == Op::Leaf) return n.trainable;
        return true;
    }
    void accum(int id, std::size_t flat, double g) {
        if (wants_grad(id)) nodes_[static_cast<std::size_t>(id)].grad.data[flat] += g;
    }
};

double stable_softplus(double t);
double stable_sigmoid(double t);

}  // namespace p2bench::ad
