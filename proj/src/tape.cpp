#include "p2bench/tape.hpp"

#include <cmath>

namespace p2bench::ad {

double stable_softplus(double t) {
    // log(1 + e^t) without overflow on either side
    return std::log1p(std::exp(-std::abs(t))) + (t > 0.0 ? t : 0.0);
}

double stable_sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

namespace {

const char* op_name(Op op) {
    switch (op) {
        case Op::Constant: return "constant";
        case Op::Leaf: return "leaf";
        case Op::MatMul: return "matmul";
        case Op::MatMulNT: return "matmul_nt";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Scale: return "scale";
        case Op::AddConst: return "add_const";
        case Op::Relu: return "relu";
        case Op::Sigmoid: return "sigmoid";
        case Op::Softplus: return "softplus";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::MaxConst: return "max_const";
        case Op::MinConst: return "min_const";
        case Op::LogSumExpRows: return "logsumexp_rows";
        case Op::SumRows: return "sum_rows";
        case Op::GatherRows: return "gather_rows";
        case Op::TakePerRow: return "take_per_row";
        case Op::ConcatCols: return "concat_cols";
        case Op::ConcatRows: return "concat_rows";
        case Op::SumAll: return "sum_all";
        case Op::MeanAll: return "mean_all";
    }
    return "?";
}

}  // namespace

int Tape::check(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw TapeError("invalid tape variable");
    return v.id;
}

Tape::Var Tape::push(Node n) {
    if (n.op != Op::Constant && n.op != Op::Leaf) {
        for (double x : n.val.data)
            if (!std::isfinite(x))
                throw TapeError(std::string("non-finite value out of op ") + op_name(n.op));
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::Constant;
    n.val = std::move(value);
    return push(std::move(n));
}

Tape::Var Tape::leaf(Tensor value, bool trainable) {
    for (double x : value.data)
        if (!std::isfinite(x)) throw TapeError("non-finite value in leaf");
    Node n;
    n.op = Op::Leaf;
    n.val = std::move(value);
    n.trainable = trainable;
    return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.cols() != B.rows()) throw TapeError("matmul: inner dimensions differ");
    Node n;
    n.op = Op::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), B.cols());
    const std::size_t nr = A.rows(), nk = A.cols(), nc = B.cols();
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t k = 0; k < nk; ++k) {
            const double aik = A.data[i * nk + k];
            for (std::size_t j = 0; j < nc; ++j)
                n.val.data[i * nc + j] += aik * B.data[k * nc + j];
        }
    return push(std::move(n));
}

Tape::Var Tape::matmul_nt(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.cols() != B.cols()) throw TapeError("matmul_nt: inner dimensions differ");
    Node n;
    n.op = Op::MatMulNT;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), B.rows());
    const std::size_t nr = A.rows(), nk = A.cols(), nc = B.rows();
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < nk; ++k) s += A.data[i * nk + k] * B.data[j * nk + k];
            n.val.data[i * nc + j] = s;
        }
    return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    Node n;
    n.op = Op::Add;
    n.a = a.id;
    n.b = b.id;
    if (A.same_shape(B)) {
        n.val = A;
        for (std::size_t i = 0; i < B.size(); ++i) n.val.data[i] += B.data[i];
    } else if (B.rows() == 1 && B.cols() == A.cols()) {
        // bias row broadcast over rows of a
        n.val = A;
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < A.cols(); ++j) n.val.at(i, j) += B.data[j];
    } else {
        throw TapeError("add: incompatible shapes");
    }
    return push(std::move(n));
}

Tape::Var Tape::sub(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (!A.same_shape(B)) throw TapeError("sub: shapes differ");
    Node n;
    n.op = Op::Sub;
    n.a = a.id;
    n.b = b.id;
    n.val = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.val.data[i] -= B.data[i];
    return push(std::move(n));
}

Tape::Var Tape::mul(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    Node n;
    n.op = Op::Mul;
    n.a = a.id;
    n.b = b.id;
    if (A.same_shape(B)) {
        n.val = A;
        for (std::size_t i = 0; i < B.size(); ++i) n.val.data[i] *= B.data[i];
    } else if (B.size() == 1) {
        n.val = A;
        for (double& x : n.val.data) x *= B.data[0];
    } else if (A.size() == 1) {
        n.val = B;
        for (double& x : n.val.data) x *= A.data[0];
    } else {
        throw TapeError("mul: incompatible shapes");
    }
    return push(std::move(n));
}

Tape::Var Tape::scale(Var a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.c = c;
    n.val = in(a);
    for (double& x : n.val.data) x *= c;
    return push(std::move(n));
}

Tape::Var Tape::add_const(Var a, double c) {
    Node n;
    n.op = Op::AddConst;
    n.a = a.id;
    n.c = c;
    n.val = in(a);
    for (double& x : n.val.data) x += c;
    return push(std::move(n));
}

Tape::Var Tape::neg(Var a) { return scale(a, -1.0); }

Tape::Var Tape::relu(Var a) {
    Node n;
    n.op = Op::Relu;
    n.a = a.id;
    n.val = in(a);
    for (double& x : n.val.data) x = x > 0.0 ? x : 0.0;
    return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var a) {
    Node n;
    n.op = Op::Sigmoid;
    n.a = a.id;
    n.val = in(a);
    for (double& x : n.val.data) x = stable_sigmoid(x);
    return push(std::move(n));
}

Tape::Var Tape::softplus(Var a) {
    Node n;
    n.op = Op::Softplus;
    n.a = a.id;
    n.val = in(a);
    for (double& x : n.val.data) x = stable_softplus(x);
    return push(std::move(n));
}

Tape::Var Tape::exp(Var a) {
    Node n;
    n.op = Op::Exp;
    n.a = a.id;
    n.val = in(a);
    for (double& x : n.val.data) x = std::exp(x);
    return push(std::move(n));
}

Tape::Var Tape::log(Var a) {
    Node n;
    n.op = Op::Log;
    n.a = a.id;
    n.val = in(a);
    for (double& x : n.val.data) {
        if (x <= 0.0) throw TapeError("log: non-positive input");
        x = std::log(x);
    }
    return push(std::move(n));
}

Tape::Var Tape::max_const(Var a, double c) {
    Node n;
    n.op = Op::MaxConst;
    n.a = a.id;
    n.c = c;
    n.val = in(a);
    for (double& x : n.val.data) x = x > c ? x : c;
    return push(std::move(n));
}

Tape::Var Tape::min_const(Var a, double c) {
    Node n;
    n.op = Op::MinConst;
    n.a = a.id;
    n.c = c;
    n.val = in(a);
    for (double& x : n.val.data) x = x < c ? x : c;
    return push(std::move(n));
}

Tape::Var Tape::logsumexp_rows(Var a) {
    const Tensor& A = in(a);
    Node n;
    n.op = Op::LogSumExpRows;
    n.a = a.id;
    n.val = Tensor(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double m = A.at(i, 0);
        for (std::size_t j = 1; j < A.cols(); ++j) m = std::max(m, A.at(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) s += std::exp(A.at(i, j) - m);
        n.val.data[i] = m + std::log(s);
    }
    return push(std::move(n));
}

Tape::Var Tape::sum_rows(Var a) {
    const Tensor& A = in(a);
    Node n;
    n.op = Op::SumRows;
    n.a = a.id;
    n.val = Tensor(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) s += A.at(i, j);
        n.val.data[i] = s;
    }
    return push(std::move(n));
}

Tape::Var Tape::gather_rows(Var table, std::vector<int> idx) {
    const Tensor& T = in(table);
    Node n;
    n.op = Op::GatherRows;
    n.a = table.id;
    n.val = Tensor(idx.size(), T.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const int r = idx[i];
        if (r < 0 || static_cast<std::size_t>(r) >= T.rows())
            throw TapeError("gather_rows: index out of range");
        for (std::size_t j = 0; j < T.cols(); ++j) n.val.at(i, j) = T.at(r, j);
    }
    n.idx = std::move(idx);
    return push(std::move(n));
}

Tape::Var Tape::take_per_row(Var a, std::vector<int> idx) {
    const Tensor& A = in(a);
    if (idx.size() != A.rows()) throw TapeError("take_per_row: index count != rows");
    Node n;
    n.op = Op::TakePerRow;
    n.a = a.id;
    n.val = Tensor(A.rows(), 1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const int j = idx[i];
        if (j < 0 || static_cast<std::size_t>(j) >= A.cols())
            throw TapeError("take_per_row: index out of range");
        n.val.data[i] = A.at(i, j);
    }
    n.idx = std::move(idx);
    return push(std::move(n));
}

Tape::Var Tape::concat_cols(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.rows() != B.rows()) throw TapeError("concat_cols: row counts differ");
    Node n;
    n.op = Op::ConcatCols;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), A.cols() + B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) n.val.at(i, j) = A.at(i, j);
        for (std::size_t j = 0; j < B.cols(); ++j) n.val.at(i, A.cols() + j) = B.at(i, j);
    }
    return push(std::move(n));
}

Tape::Var Tape::concat_rows(Var a, Var b) {
    const Tensor& A = in(a);
    const Tensor& B = in(b);
    if (A.cols() != B.cols()) throw TapeError("concat_rows: column counts differ");
    Node n;
    n.op = Op::ConcatRows;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows() + B.rows(), A.cols());
    std::copy(A.data.begin(), A.data.end(), n.val.data.begin());
    std::copy(B.data.begin(), B.data.end(), n.val.data.begin() + static_cast<long>(A.size()));
    return push(std::move(n));
}

Tape::Var Tape::sum_all(Var a) {
    const Tensor& A = in(a);
    double s = 0.0;
    for (double x : A.data) s += x;
    Node n;
    n.op = Op::SumAll;
    n.a = a.id;
    n.val = Tensor::scalar(s);
    return push(std::move(n));
}

Tape::Var Tape::mean_all(Var a) {
    const Tensor& A = in(a);
    if (A.size() == 0) throw TapeError("mean_all: empty tensor");
    double s = 0.0;
    for (double x : A.data) s += x;
    Node n;
    n.op = Op::MeanAll;
    n.a = a.id;
    n.val = Tensor::scalar(s / static_cast<double>(A.size()));
    return push(std::move(n));
}

double Tape::scalar_value(Var v) const {
    const Tensor& t = value(v);
    if (t.size() != 1) throw TapeError("scalar_value: tensor is not 1x1");
    return t.data[0];
}

void Tape::backward(Var out) {
    const int out_id = check(out);
    if (backward_done_) throw TapeError("backward: already run on this tape");
    if (nodes_[static_cast<std::size_t>(out_id)].val.size() != 1)
        throw TapeError("backward: output is not scalar");
    backward_done_ = true;

    for (Node& n : nodes_) n.grad = Tensor::zeros_like(n.val);
    nodes_[static_cast<std::size_t>(out_id)].grad.data[0] = 1.0;

    for (int id = out_id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Constant:
            case Op::Leaf:
                break;
            case Op::MatMul: {
                const Tensor& A = nodes_[n.a].val;
                const Tensor& B = nodes_[n.b].val;
                const std::size_t nr = A.rows(), nk = A.cols(), nc = B.cols();
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < nr; ++i)
                        for (std::size_t j = 0; j < nc; ++j) {
                            const double gij = g.data[i * nc + j];
                            if (gij == 0.0) continue;
                            for (std::size_t k = 0; k < nk; ++k)
                                ga.data[i * nk + k] += gij * B.data[k * nc + j];
                        }
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    for (std::size_t i = 0; i < nr; ++i)
                        for (std::size_t k = 0; k < nk; ++k) {
                            const double aik = A.data[i * nk + k];
                            if (aik == 0.0) continue;
                            for (std::size_t j = 0; j < nc; ++j)
                                gb.data[k * nc + j] += aik * g.data[i * nc + j];
                        }
                }
                break;
            }
            case Op::MatMulNT: {
                // out(i,j) = sum_k A(i,k) B(j,k)
                const Tensor& A = nodes_[n.a].val;
                const Tensor& B = nodes_[n.b].val;
                const std::size_t nr = A.rows(), nk = A.cols(), nc = B.rows();
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < nr; ++i)
                        for (std::size_t j = 0; j < nc; ++j) {
                            const double gij = g.data[i * nc + j];
                            if (gij == 0.0) continue;
                            for (std::size_t k = 0; k < nk; ++k)
                                ga.data[i * nk + k] += gij * B.data[j * nk + k];
                        }
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    for (std::size_t i = 0; i < nr; ++i)
                        for (std::size_t j = 0; j < nc; ++j) {
                            const double gij = g.data[i * nc + j];
                            if (gij == 0.0) continue;
                            for (std::size_t k = 0; k < nk; ++k)
                                gb.data[j * nk + k] += gij * A.data[i * nk + k];
                        }
                }
                break;
            }
            case Op::Add: {
                const Tensor& A = nodes_[n.a].val;
                const Tensor& B = nodes_[n.b].val;
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    if (A.same_shape(B)) {
                        for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
                    } else {
                        for (std::size_t i = 0; i < A.rows(); ++i)
                            for (std::size_t j = 0; j < A.cols(); ++j)
                                gb.data[j] += g.at(i, j);
                    }
                }
                break;
            }
            case Op::Sub: {
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
                }
                break;
            }
            case Op::Mul: {
                const Tensor& A = nodes_[n.a].val;
                const Tensor& B = nodes_[n.b].val;
                if (A.same_shape(B)) {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        accum(n.a, i, g.data[i] * B.data[i]);
                        accum(n.b, i, g.data[i] * A.data[i]);
                    }
                } else if (B.size() == 1) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        accum(n.a, i, g.data[i] * B.data[0]);
                        s += g.data[i] * A.data[i];
                    }
                    accum(n.b, 0, s);
                } else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        accum(n.b, i, g.data[i] * A.data[0]);
                        s += g.data[i] * B.data[i];
                    }
                    accum(n.a, 0, s);
                }
                break;
            }
            case Op::Scale: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * n.c;
                break;
            }
            case Op::AddConst: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
                break;
            }
            case Op::Relu: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (A.data[i] > 0.0) ga.data[i] += g.data[i];
                break;
            }
            case Op::Sigmoid: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double s = n.val.data[i];
                    ga.data[i] += g.data[i] * s * (1.0 - s);
                }
                break;
            }
            case Op::Softplus: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga.data[i] += g.data[i] * stable_sigmoid(A.data[i]);
                break;
            }
            case Op::Exp: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * n.val.data[i];
                break;
            }
            case Op::Log: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / A.data[i];
                break;
            }
            case Op::MaxConst: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (A.data[i] > n.c) ga.data[i] += g.data[i];
                break;
            }
            case Op::MinConst: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (A.data[i] < n.c) ga.data[i] += g.data[i];
                break;
            }
            case Op::LogSumExpRows: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < A.rows(); ++i) {
                    const double gi = g.data[i];
                    if (gi == 0.0) continue;
                    const double lse = n.val.data[i];
                    for (std::size_t j = 0; j < A.cols(); ++j)
                        ga.at(i, j) += gi * std::exp(A.at(i, j) - lse);
                }
                break;
            }
            case Op::SumRows: {
                if (!wants_grad(n.a)) break;
                const Tensor& A = nodes_[n.a].val;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < A.rows(); ++i)
                    for (std::size_t j = 0; j < A.cols(); ++j) ga.at(i, j) += g.data[i];
                break;
            }
            case Op::GatherRows: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < n.idx.size(); ++i) {
                    const std::size_t r = static_cast<std::size_t>(n.idx[i]);
                    for (std::size_t j = 0; j < ga.cols(); ++j) ga.at(r, j) += g.at(i, j);
                }
                break;
            }
            case Op::TakePerRow: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < n.idx.size(); ++i)
                    ga.at(i, static_cast<std::size_t>(n.idx[i])) += g.data[i];
                break;
            }
            case Op::ConcatCols: {
                const Tensor& A = nodes_[n.a].val;
                const Tensor& B = nodes_[n.b].val;
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < A.rows(); ++i)
                        for (std::size_t j = 0; j < A.cols(); ++j) ga.at(i, j) += g.at(i, j);
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    for (std::size_t i = 0; i < B.rows(); ++i)
                        for (std::size_t j = 0; j < B.cols(); ++j)
                            gb.at(i, j) += g.at(i, A.cols() + j);
                }
                break;
            }
            case Op::ConcatRows: {
                const Tensor& A = nodes_[n.a].val;
                if (wants_grad(n.a)) {
                    Tensor& ga = nodes_[n.a].grad;
                    for (std::size_t i = 0; i < A.size(); ++i) ga.data[i] += g.data[i];
                }
                if (wants_grad(n.b)) {
                    Tensor& gb = nodes_[n.b].grad;
                    for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += g.data[A.size() + i];
                }
                break;
            }
            case Op::SumAll: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                for (double& x : ga.data) x += g.data[0];
                break;
            }
            case Op::MeanAll: {
                if (!wants_grad(n.a)) break;
                Tensor& ga = nodes_[n.a].grad;
                const double gi = g.data[0] / static_cast<double>(ga.size());
                for (double& x : ga.data) x += gi;
                break;
            }
        }
    }
}

}  // namespace p2bench::ad
