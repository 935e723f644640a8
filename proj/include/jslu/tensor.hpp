#ifndef JSLU_TENSOR_HPP
#define JSLU_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jslu/errors.hpp"

// Dense tensors with reverse-mode differentiation. A Graph records every
// operation in forward order; backward() replays the record in exact
// reverse order, accumulating gradients into each node. Leaf gradients
// therefore sum over all use sites.

namespace jslu {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ")";
    return os.str();
}

inline void check_same_shape(const Shape& a, const Shape& b, const char* op) {
    if (a != b)
        throw dim_error(std::string(op) + ": shape mismatch " + shape_str(a) +
                        " vs " + shape_str(b));
}

// Plain value tensor. grad is nonempty iff requires_grad.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;

    Tensor() = default;
    Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_numel(shape))
            throw dim_error("tensor: data length " + std::to_string(data.size()) +
                            " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(Shape s) {
        std::size_t n = shape_numel(s);
        return Tensor(std::move(s), std::vector<T>(n, T(0)));
    }

    static Tensor vector(std::vector<T> d) {
        Shape s{d.size()};
        return Tensor(std::move(s), std::move(d));
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    T& at(std::size_t i) { return data[i]; }
    T at(std::size_t i) const { return data[i]; }
    T& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    T at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    void set_requires_grad(bool on) {
        requires_grad = on;
        if (on)
            grad.assign(data.size(), T(0));
        else
            grad.clear();
    }

    void zero_grad() {
        if (requires_grad) grad.assign(data.size(), T(0));
    }

    bool finite() const {
        for (T v : data)
            if (!std::isfinite(double(v))) return false;
        return true;
    }
};

template <typename T>
class Graph;

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // allocated on first contribution
    std::function<void()> backprop;
    bool requires_grad = false;

    std::size_t numel() const { return value.size(); }

    // Accumulation target; creating it marks the node as reached.
    std::vector<T>& grad_buf() {
        if (grad.empty()) grad.assign(value.size(), T(0));
        return grad;
    }
};

// Lightweight handle into a Graph. Valid only while the graph lives.
template <typename T>
class Var {
public:
    Var() = default;
    explicit Var(Node<T>* n) : node_(n) {}

    bool valid() const { return node_ != nullptr; }
    Node<T>* node() const { return node_; }
    const Shape& shape() const { return node_->shape; }
    std::size_t numel() const { return node_->value.size(); }
    const std::vector<T>& value() const { return node_->value; }
    const std::vector<T>& grad() const { return node_->grad; }

    T scalar() const {
        if (numel() != 1)
            throw dim_error("scalar: tensor has shape " + shape_str(shape()));
        return node_->value[0];
    }

private:
    Node<T>* node_ = nullptr;
};

// Ordered record of operations; owns every node it creates.
template <typename T>
class Graph {
public:
    Var<T> leaf(const Tensor<T>& t) {
        Node<T>* n = make(t.shape);
        n->value = t.data;
        n->requires_grad = t.requires_grad;
        return Var<T>(n);
    }

    Var<T> constant(Shape shape, std::vector<T> data) {
        if (data.size() != shape_numel(shape))
            throw dim_error("constant: data length does not match shape " +
                            shape_str(shape));
        Node<T>* n = make(std::move(shape));
        n->value = std::move(data);
        return Var<T>(n);
    }

    Var<T> scalar(T v) { return constant(Shape{1}, {v}); }

    Var<T> zeros(std::size_t n) {
        return constant(Shape{n}, std::vector<T>(n, T(0)));
    }

    Node<T>* make(Shape shape) {
        nodes_.push_back(std::make_unique<Node<T>>());
        Node<T>* n = nodes_.back().get();
        n->shape = std::move(shape);
        n->value.resize(shape_numel(n->shape));
        return n;
    }

    // Seeds d(loss)/d(loss) = 1 and replays the op record in exact reverse
    // of forward order. Nodes never reached keep an empty grad.
    void backward(Var<T> loss) {
        if (loss.numel() != 1)
            throw dim_error("backward: loss must be scalar, got " +
                            shape_str(loss.shape()));
        if (!std::isfinite(double(loss.scalar())))
            throw numeric_error("backward: loss is not finite");
        loss.node()->grad_buf()[0] = T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node<T>* n = it->get();
            if (!n->grad.empty() && n->backprop) n->backprop();
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    std::deque<std::unique_ptr<Node<T>>> nodes_;
};

// ---- elementwise arithmetic ----

template <typename T>
Var<T> add(Graph<T>& g, Var<T> a, Var<T> b) {
    check_same_shape(a.shape(), b.shape(), "add");
    Node<T>* out = g.make(a.shape());
    Node<T>*na = a.node(), *nb = b.node();
    for (std::size_t i = 0; i < out->numel(); ++i)
        out->value[i] = na->value[i] + nb->value[i];
    out->backprop = [out, na, nb] {
        auto &ga = na->grad_buf(), &gb = nb->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) {
            ga[i] += out->grad[i];
            gb[i] += out->grad[i];
        }
    };
    return Var<T>(out);
}

template <typename T>
Var<T> add_n(Graph<T>& g, const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw dim_error("add_n: empty operand list");
    for (const auto& x : xs) check_same_shape(xs[0].shape(), x.shape(), "add_n");
    Node<T>* out = g.make(xs[0].shape());
    std::vector<Node<T>*> ins;
    ins.reserve(xs.size());
    for (const auto& x : xs) ins.push_back(x.node());
    for (std::size_t i = 0; i < out->numel(); ++i) {
        T s = T(0);
        for (Node<T>* n : ins) s += n->value[i];
        out->value[i] = s;
    }
    out->backprop = [out, ins] {
        for (Node<T>* n : ins) {
            auto& gi = n->grad_buf();
            for (std::size_t i = 0; i < out->numel(); ++i) gi[i] += out->grad[i];
        }
    };
    return Var<T>(out);
}

template <typename T>
Var<T> mul(Graph<T>& g, Var<T> a, Var<T> b) {
    check_same_shape(a.shape(), b.shape(), "mul");
    Node<T>* out = g.make(a.shape());
    Node<T>*na = a.node(), *nb = b.node();
    for (std::size_t i = 0; i < out->numel(); ++i)
        out->value[i] = na->value[i] * nb->value[i];
    out->backprop = [out, na, nb] {
        auto &ga = na->grad_buf(), &gb = nb->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) {
            ga[i] += out->grad[i] * nb->value[i];
            gb[i] += out->grad[i] * na->value[i];
        }
    };
    return Var<T>(out);
}

template <typename T>
Var<T> scale(Graph<T>& g, Var<T> x, T c) {
    Node<T>* out = g.make(x.shape());
    Node<T>* nx = x.node();
    for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = nx->value[i] * c;
    out->backprop = [out, nx, c] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) gx[i] += out->grad[i] * c;
    };
    return Var<T>(out);
}

// Multiply a tensor by a 1-element tensor; gradients reach both.
template <typename T>
Var<T> scale_by(Graph<T>& g, Var<T> x, Var<T> s) {
    if (s.numel() != 1)
        throw dim_error("scale_by: scale must be scalar, got " + shape_str(s.shape()));
    Node<T>* out = g.make(x.shape());
    Node<T>*nx = x.node(), *ns = s.node();
    T c = ns->value[0];
    for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = nx->value[i] * c;
    out->backprop = [out, nx, ns] {
        auto& gx = nx->grad_buf();
        auto& gs = ns->grad_buf();
        T c2 = ns->value[0];
        T acc = T(0);
        for (std::size_t i = 0; i < out->numel(); ++i) {
            gx[i] += out->grad[i] * c2;
            acc += out->grad[i] * nx->value[i];
        }
        gs[0] += acc;
    };
    return Var<T>(out);
}

// ---- shape ops ----

template <typename T>
Var<T> concat(Graph<T>& g, const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw dim_error("concat: empty operand list");
    std::size_t total = 0;
    for (const auto& x : xs) total += x.numel();
    Node<T>* out = g.make(Shape{total});
    std::vector<Node<T>*> ins;
    ins.reserve(xs.size());
    std::size_t off = 0;
    for (const auto& x : xs) {
        ins.push_back(x.node());
        for (std::size_t i = 0; i < x.numel(); ++i)
            out->value[off + i] = x.value()[i];
        off += x.numel();
    }
    out->backprop = [out, ins] {
        std::size_t o = 0;
        for (Node<T>* n : ins) {
            auto& gi = n->grad_buf();
            for (std::size_t i = 0; i < n->numel(); ++i) gi[i] += out->grad[o + i];
            o += n->numel();
        }
    };
    return Var<T>(out);
}

template <typename T>
Var<T> slice(Graph<T>& g, Var<T> x, std::size_t begin, std::size_t end) {
    if (begin > end || end > x.numel())
        throw dim_error("slice: range [" + std::to_string(begin) + "," +
                        std::to_string(end) + ") out of " + shape_str(x.shape()));
    Node<T>* out = g.make(Shape{end - begin});
    Node<T>* nx = x.node();
    for (std::size_t i = begin; i < end; ++i) out->value[i - begin] = nx->value[i];
    out->backprop = [out, nx, begin] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) gx[begin + i] += out->grad[i];
    };
    return Var<T>(out);
}

// Row r of a matrix-shaped var.
template <typename T>
Var<T> row(Graph<T>& g, Var<T> m, std::size_t r) {
    if (m.shape().size() != 2)
        throw dim_error("row: expected matrix, got " + shape_str(m.shape()));
    std::size_t cols = m.shape()[1];
    if (r >= m.shape()[0])
        throw index_error("row: index " + std::to_string(r) + " out of " +
                          shape_str(m.shape()));
    return slice(g, m, r * cols, (r + 1) * cols);
}

// ---- reductions ----

template <typename T>
Var<T> sum(Graph<T>& g, Var<T> x) {
    Node<T>* out = g.make(Shape{1});
    Node<T>* nx = x.node();
    T s = T(0);
    for (T v : nx->value) s += v;
    out->value[0] = s;
    out->backprop = [out, nx] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < nx->numel(); ++i) gx[i] += out->grad[0];
    };
    return Var<T>(out);
}

template <typename T>
Var<T> dot(Graph<T>& g, Var<T> a, Var<T> b) {
    check_same_shape(a.shape(), b.shape(), "dot");
    Node<T>* out = g.make(Shape{1});
    Node<T>*na = a.node(), *nb = b.node();
    T s = T(0);
    for (std::size_t i = 0; i < na->numel(); ++i) s += na->value[i] * nb->value[i];
    out->value[0] = s;
    out->backprop = [out, na, nb] {
        auto &ga = na->grad_buf(), &gb = nb->grad_buf();
        T go = out->grad[0];
        for (std::size_t i = 0; i < na->numel(); ++i) {
            ga[i] += go * nb->value[i];
            gb[i] += go * na->value[i];
        }
    };
    return Var<T>(out);
}

// Elementwise max across a nonempty list of same-shape vars. The gradient
// routes only to the argmax; ties break toward the lowest list index.
template <typename T>
Var<T> max_over(Graph<T>& g, const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw dim_error("max_over: empty reduction axis");
    for (const auto& x : xs) check_same_shape(xs[0].shape(), x.shape(), "max_over");
    Node<T>* out = g.make(xs[0].shape());
    std::vector<Node<T>*> ins;
    ins.reserve(xs.size());
    for (const auto& x : xs) ins.push_back(x.node());
    auto argmax = std::make_shared<std::vector<std::size_t>>(out->numel());
    for (std::size_t i = 0; i < out->numel(); ++i) {
        std::size_t best = 0;
        T bv = ins[0]->value[i];
        for (std::size_t k = 1; k < ins.size(); ++k)
            if (ins[k]->value[i] > bv) {
                bv = ins[k]->value[i];
                best = k;
            }
        out->value[i] = bv;
        (*argmax)[i] = best;
    }
    out->backprop = [out, ins, argmax] {
        for (std::size_t i = 0; i < out->numel(); ++i)
            ins[(*argmax)[i]]->grad_buf()[i] += out->grad[i];
    };
    return Var<T>(out);
}

// ---- activations ----

template <typename T>
Var<T> sigmoid(Graph<T>& g, Var<T> x) {
    Node<T>* out = g.make(x.shape());
    Node<T>* nx = x.node();
    for (std::size_t i = 0; i < out->numel(); ++i) {
        T v = nx->value[i];
        // Evaluate from the side that keeps exp() from overflowing.
        if (v >= T(0)) {
            T e = std::exp(-v);
            out->value[i] = T(1) / (T(1) + e);
        } else {
            T e = std::exp(v);
            out->value[i] = e / (T(1) + e);
        }
    }
    out->backprop = [out, nx] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) {
            T y = out->value[i];
            gx[i] += out->grad[i] * y * (T(1) - y);
        }
    };
    return Var<T>(out);
}

template <typename T>
Var<T> tanh(Graph<T>& g, Var<T> x) {
    Node<T>* out = g.make(x.shape());
    Node<T>* nx = x.node();
    for (std::size_t i = 0; i < out->numel(); ++i)
        out->value[i] = std::tanh(nx->value[i]);
    out->backprop = [out, nx] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i) {
            T y = out->value[i];
            gx[i] += out->grad[i] * (T(1) - y * y);
        }
    };
    return Var<T>(out);
}

// relu'(0) is defined as 0 so the backward pass is reproducible.
template <typename T>
Var<T> relu(Graph<T>& g, Var<T> x) {
    Node<T>* out = g.make(x.shape());
    Node<T>* nx = x.node();
    for (std::size_t i = 0; i < out->numel(); ++i)
        out->value[i] = nx->value[i] > T(0) ? nx->value[i] : T(0);
    out->backprop = [out, nx] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i)
            if (nx->value[i] > T(0)) gx[i] += out->grad[i];
    };
    return Var<T>(out);
}

enum class Activation { sigmoid, tanh, relu };

template <typename T>
Var<T> activation(Graph<T>& g, Var<T> x, Activation kind) {
    switch (kind) {
        case Activation::sigmoid: return sigmoid(g, x);
        case Activation::tanh: return tanh(g, x);
        case Activation::relu: return relu(g, x);
    }
    throw config_error("activation: unknown kind");
}

// ---- linear layer ----

// y = W x + b with W (m x n), x (n), b (m).
template <typename T>
Var<T> affine(Graph<T>& g, Var<T> w, Var<T> x, Var<T> b) {
    if (w.shape().size() != 2)
        throw dim_error("affine: weight must be a matrix, got " + shape_str(w.shape()));
    std::size_t m = w.shape()[0], n = w.shape()[1];
    if (x.numel() != n)
        throw dim_error("affine: weight " + shape_str(w.shape()) +
                        " does not accept input " + shape_str(x.shape()));
    if (b.numel() != m)
        throw dim_error("affine: bias " + shape_str(b.shape()) +
                        " does not match weight " + shape_str(w.shape()));
    Node<T>* out = g.make(Shape{m});
    Node<T>*nw = w.node(), *nx = x.node(), *nb = b.node();
    const T* wd = nw->value.data();
    const T* xd = nx->value.data();
    for (std::size_t i = 0; i < m; ++i) {
        const T* wrow = wd + i * n;
        T s = nb->value[i];
        for (std::size_t j = 0; j < n; ++j) s += wrow[j] * xd[j];
        out->value[i] = s;
    }
    out->backprop = [out, nw, nx, nb, m, n] {
        auto& gw = nw->grad_buf();
        auto& gx = nx->grad_buf();
        auto& gb = nb->grad_buf();
        const T* wd2 = nw->value.data();
        const T* xd2 = nx->value.data();
        for (std::size_t i = 0; i < m; ++i) {
            T go = out->grad[i];
            if (go == T(0)) continue;
            gb[i] += go;
            T* gwrow = gw.data() + i * n;
            const T* wrow = wd2 + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                gwrow[j] += go * xd2[j];
                gx[j] += go * wrow[j];
            }
        }
    };
    return Var<T>(out);
}

// ---- losses and penalties ----

// Numerically stable softmax of a plain vector (max subtraction).
template <typename T>
std::vector<T> softmax_values(const std::vector<T>& logits) {
    T mx = logits[0];
    for (T v : logits) mx = std::max(mx, v);
    std::vector<T> p(logits.size());
    T z = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (T& v : p) v /= z;
    return p;
}

// loss = -log softmax(logits)[target]; d loss / d logits = p - onehot(target).
template <typename T>
Var<T> softmax_nll(Graph<T>& g, Var<T> logits, std::size_t target) {
    std::size_t k = logits.numel();
    if (target >= k)
        throw index_error("softmax_nll: target " + std::to_string(target) +
                          " out of range for " + std::to_string(k) + " classes");
    Node<T>* nx = logits.node();
    T mx = nx->value[0];
    for (T v : nx->value) mx = std::max(mx, v);
    T z = T(0);
    for (T v : nx->value) z += std::exp(v - mx);
    T logz = std::log(z) + mx;
    Node<T>* out = g.make(Shape{1});
    out->value[0] = logz - nx->value[target];
    out->backprop = [out, nx, target, logz] {
        auto& gx = nx->grad_buf();
        T go = out->grad[0];
        for (std::size_t i = 0; i < nx->numel(); ++i) {
            T p = std::exp(nx->value[i] - logz);
            gx[i] += go * (p - (i == target ? T(1) : T(0)));
        }
    };
    return Var<T>(out);
}

// Clamp into [lo, hi]; gradient is blocked where the clamp is active.
template <typename T>
Var<T> clamp(Graph<T>& g, Var<T> x, T lo, T hi) {
    Node<T>* out = g.make(x.shape());
    Node<T>* nx = x.node();
    for (std::size_t i = 0; i < out->numel(); ++i)
        out->value[i] = std::min(hi, std::max(lo, nx->value[i]));
    out->backprop = [out, nx, lo, hi] {
        auto& gx = nx->grad_buf();
        for (std::size_t i = 0; i < out->numel(); ++i)
            if (nx->value[i] > lo && nx->value[i] < hi) gx[i] += out->grad[i];
    };
    return Var<T>(out);
}

// Bernoulli KL(rho || q) summed over the elements of q; each q must already
// lie strictly inside (0, 1). dKL/dq = -rho/q + (1-rho)/(1-q).
template <typename T>
Var<T> kl_bernoulli(Graph<T>& g, T rho, Var<T> q) {
    if (!(rho > T(0) && rho < T(1)))
        throw config_error("kl_bernoulli: rho must lie in (0,1), got " +
                           std::to_string(double(rho)));
    Node<T>* out = g.make(Shape{1});
    Node<T>* nq = q.node();
    T s = T(0);
    for (T v : nq->value)
        s += rho * std::log(rho / v) + (T(1) - rho) * std::log((T(1) - rho) / (T(1) - v));
    out->value[0] = s;
    out->backprop = [out, nq, rho] {
        auto& gq = nq->grad_buf();
        T go = out->grad[0];
        for (std::size_t i = 0; i < nq->numel(); ++i) {
            T v = nq->value[i];
            gq[i] += go * (-rho / v + (T(1) - rho) / (T(1) - v));
        }
    };
    return Var<T>(out);
}

// Scalar closed form, shared with the graph op above.
template <typename T>
T kl_bernoulli_value(T rho, T q) {
    return rho * std::log(rho / q) +
           (T(1) - rho) * std::log((T(1) - rho) / (T(1) - q));
}

// ---- finite-difference verification ----

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> params;
    double max_rel_err = 0.0;

    bool ok(double tolerance) const { return max_rel_err < tolerance; }
};

using NamedParam = std::pair<std::string, Tensor<double>*>;

// Central finite differences against the analytic gradients.
//
// fn(with_grad) must evaluate the scalar loss from the current parameter
// values; when with_grad is true it must also accumulate d loss / d param
// into each tensor's (pre-zeroed) grad. skip(name, i) may exclude elements
// sitting on non-differentiable points.
template <typename Fn>
GradCheckReport grad_check(
    Fn&& fn, const std::vector<NamedParam>& params, double step,
    const std::function<bool(const std::string&, std::size_t)>& skip = nullptr) {
    for (const auto& [name, t] : params) {
        t->set_requires_grad(true);
        t->zero_grad();
    }
    double base = fn(true);
    if (!std::isfinite(base))
        throw numeric_error("grad_check: loss is not finite at the base point");

    GradCheckReport report;
    for (const auto& [name, t] : params) {
        GradCheckEntry entry;
        entry.name = name;
        std::vector<double> analytic = t->grad;
        for (std::size_t i = 0; i < t->numel(); ++i) {
            if (skip && skip(name, i)) continue;
            double saved = t->data[i];
            t->data[i] = saved + step;
            double up = fn(false);
            t->data[i] = saved - step;
            double down = fn(false);
            t->data[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw numeric_error("grad_check: loss is not finite while probing " +
                                    name + "[" + std::to_string(i) + "]");
            double numeric = (up - down) / (2.0 * step);
            double a = analytic[i];
            double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-8});
            ++entry.checked;
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.worst_index = i;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.params.push_back(std::move(entry));
    }
    return report;
}

} // namespace jslu

#endif
