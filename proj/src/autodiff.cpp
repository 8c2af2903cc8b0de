// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace pl::ad {

Var leaf(Tensor t) {
    auto n = std::make_shared<Node>();
    n->grad = Tensor::zeros_like(t);
    n->value = std::move(t);
    return Var(n);
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->grad = Tensor::zeros_like(value);
    n->value = std::move(value);
    n->parents.reserve(parents.size());
    for (auto& p : parents) {
        if (!p.valid()) throw std::invalid_argument("make_op: invalid parent");
        n->parents.push_back(p.node());
    }
    n->backprop = std::move(backprop);
    return Var(n);
}

void backward(const Var& root) {
    if (!root.valid()) throw std::invalid_argument("backward: empty graph handle");
    if (root.value().size() != 1)
        throw std::invalid_argument("backward: root must hold a single element, got shape " +
                                    root.value().shape_str());

    struct Frame {
        Node* n;
        std::size_t next;
    };
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<Frame> stack;
    stack.push_back({root.node().get(), 0});
    visited.insert(root.node().get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            Node* p = f.n->parents[f.next++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }
    for (Node* n : order) n->grad.zero();
    root.node()->grad[0] = 1.0;
    // order holds inputs before consumers; walk it back to front.
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

static void check_same_shape(const char* op, const Var& a, const Var& b) {
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    a.value().shape_str() + " vs " + b.value().shape_str());
}

Var add(const Var& a, const Var& b) {
    check_same_shape("add", a, b);
    Tensor v = Tensor::zeros_like(a.value());
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) v[i] = a.value()[i] + b.value()[i];
    return make_op(std::move(v), {a, b}, [](Node& nd) {
        double* ga = nd.parents[0]->grad.data();
        double* gb = nd.parents[1]->grad.data();
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape("sub", a, b);
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] - b.value()[i];
    return make_op(std::move(v), {a, b}, [](Node& nd) {
        double* ga = nd.parents[0]->grad.data();
        double* gb = nd.parents[1]->grad.data();
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape("mul", a, b);
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] * b.value()[i];
    return make_op(std::move(v), {a, b}, [](Node& nd) {
        Node& pa = *nd.parents[0];
        Node& pb = *nd.parents[1];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            pa.grad[i] += g[i] * pb.value[i];
            pb.grad[i] += g[i] * pa.value[i];
        }
    });
}

Var div(const Var& a, const Var& b) {
    check_same_shape("div", a, b);
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] / b.value()[i];
    return make_op(std::move(v), {a, b}, [](Node& nd) {
        Node& pa = *nd.parents[0];
        Node& pb = *nd.parents[1];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            const double inv = 1.0 / pb.value[i];
            pa.grad[i] += g[i] * inv;
            pb.grad[i] -= g[i] * nd.value[i] * inv;
        }
    });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a.value()[i];
    return make_op(std::move(v), {a}, [c](Node& nd) {
        double* gp = nd.parents[0]->grad.data();
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) gp[i] += c * g[i];
    });
}

Var add_const(const Var& a, double c) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] + c;
    return make_op(std::move(v), {a}, [](Node& nd) {
        double* gp = nd.parents[0]->grad.data();
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) gp[i] += g[i];
    });
}

Var tanh_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(a.value()[i]);
    return make_op(std::move(v), {a}, [](Node& nd) {
        double* gp = nd.parents[0]->grad.data();
        const double* g = nd.grad.data();
        const double* y = nd.value.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) gp[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var relu_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] > 0.0 ? a.value()[i] : 0.0;
    return make_op(std::move(v), {a}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i)
            if (p.value[i] > 0.0) p.grad[i] += g[i];
    });
}

Var sigmoid_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-a.value()[i]));
    return make_op(std::move(v), {a}, [](Node& nd) {
        double* gp = nd.parents[0]->grad.data();
        const double* g = nd.grad.data();
        const double* y = nd.value.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) gp[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var log_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(a.value()[i]);
    return make_op(std::move(v), {a}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) p.grad[i] += g[i] / p.value[i];
    });
}

Var sqrt_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(a.value()[i]);
    return make_op(std::move(v), {a}, [](Node& nd) {
        double* gp = nd.parents[0]->grad.data();
        const double* g = nd.grad.data();
        const double* y = nd.value.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) gp[i] += g[i] / (2.0 * y[i]);
    });
}

Var sin_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(a.value()[i]);
    return make_op(std::move(v), {a}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) p.grad[i] += g[i] * std::cos(p.value[i]);
    });
}

Var cos_(const Var& a) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(a.value()[i]);
    return make_op(std::move(v), {a}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i) p.grad[i] -= g[i] * std::sin(p.value[i]);
    });
}

Var clamp_min(const Var& a, double lo) {
    Tensor v = Tensor::zeros_like(a.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value()[i] > lo ? a.value()[i] : lo;
    return make_op(std::move(v), {a}, [lo](Node& nd) {
        Node& p = *nd.parents[0];
        const double* g = nd.grad.data();
        for (std::size_t i = 0; i < nd.grad.size(); ++i)
            if (p.value[i] > lo) p.grad[i] += g[i];
    });
}

Var matmul(const Var& a, const Var& b) {
    if (a.value().rank() != 2 || b.value().rank() != 2 || a.value().dim(1) != b.value().dim(0))
        throw std::invalid_argument("matmul: incompatible shapes " + a.value().shape_str() +
                                    " x " + b.value().shape_str());
    const int m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
    Tensor v({m, n});
    {
        const double* A = a.value().data();
        const double* B = b.value().data();
        double* C = v.data();
        for (int i = 0; i < m; ++i)
            for (int kk = 0; kk < k; ++kk) {
                const double aik = A[i * k + kk];
                const double* Br = B + kk * n;
                double* Cr = C + i * n;
                for (int j = 0; j < n; ++j) Cr[j] += aik * Br[j];
            }
    }
    return make_op(std::move(v), {a, b}, [m, k, n](Node& nd) {
        Node& pa = *nd.parents[0];
        Node& pb = *nd.parents[1];
        const double* G = nd.grad.data();
        const double* A = pa.value.data();
        const double* B = pb.value.data();
        double* GA = pa.grad.data();
        double* GB = pb.grad.data();
        // dA = G * B', dB = A' * G
        for (int i = 0; i < m; ++i)
            for (int kk = 0; kk < k; ++kk) {
                const double* Gr = G + i * n;
                const double* Br = B + kk * n;
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += Gr[j] * Br[j];
                GA[i * k + kk] += acc;
            }
        for (int kk = 0; kk < k; ++kk)
            for (int i = 0; i < m; ++i) {
                const double aik = A[i * k + kk];
                const double* Gr = G + i * n;
                double* GBr = GB + kk * n;
                for (int j = 0; j < n; ++j) GBr[j] += aik * Gr[j];
            }
    });
}

Var add_rowvec(const Var& x, const Var& v) {
    if (x.value().rank() != 2 || v.value().rank() != 1 || v.value().dim(0) != x.value().dim(1))
        throw std::invalid_argument("add_rowvec: incompatible shapes");
    const int m = x.value().dim(0), n = x.value().dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = x.value().at(i, j) + v.value().at(j);
    return make_op(std::move(out), {x, v}, [m, n](Node& nd) {
        Node& px = *nd.parents[0];
        Node& pv = *nd.parents[1];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double g = nd.grad.at(i, j);
                px.grad.at(i, j) += g;
                pv.grad.at(j) += g;
            }
    });
}

Var sub_rowvec(const Var& x, const Var& v) {
    if (x.value().rank() != 2 || v.value().rank() != 1 || v.value().dim(0) != x.value().dim(1))
        throw std::invalid_argument("sub_rowvec: incompatible shapes");
    const int m = x.value().dim(0), n = x.value().dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = x.value().at(i, j) - v.value().at(j);
    return make_op(std::move(out), {x, v}, [m, n](Node& nd) {
        Node& px = *nd.parents[0];
        Node& pv = *nd.parents[1];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double g = nd.grad.at(i, j);
                px.grad.at(i, j) += g;
                pv.grad.at(j) -= g;
            }
    });
}

Var mean_rows(const Var& x) {
    if (x.value().rank() != 2) throw std::invalid_argument("mean_rows: rank-2 input required");
    const int m = x.value().dim(0), n = x.value().dim(1);
    Tensor out({n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(j) += x.value().at(i, j);
    for (int j = 0; j < n; ++j) out.at(j) /= m;
    return make_op(std::move(out), {x}, [m, n](Node& nd) {
        Node& p = *nd.parents[0];
        for (int j = 0; j < n; ++j) {
            const double g = nd.grad.at(j) / m;
            for (int i = 0; i < m; ++i) p.grad.at(i, j) += g;
        }
    });
}

Var col(const Var& x, int j) {
    if (x.value().rank() != 2 || j < 0 || j >= x.value().dim(1))
        throw std::invalid_argument("col: index out of range");
    const int m = x.value().dim(0);
    Tensor out({m});
    for (int i = 0; i < m; ++i) out.at(i) = x.value().at(i, j);
    return make_op(std::move(out), {x}, [m, j](Node& nd) {
        Node& p = *nd.parents[0];
        for (int i = 0; i < m; ++i) p.grad.at(i, j) += nd.grad.at(i);
    });
}

Var stack_cols(const std::vector<Var>& cols) {
    if (cols.empty()) throw std::invalid_argument("stack_cols: no columns");
    const int m = cols[0].value().dim(0);
    const int k = static_cast<int>(cols.size());
    for (const auto& c : cols)
        if (c.value().rank() != 1 || c.value().dim(0) != m)
            throw std::invalid_argument("stack_cols: column shape mismatch");
    Tensor out({m, k});
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < m; ++i) out.at(i, j) = cols[j].value().at(i);
    return make_op(std::move(out), cols, [m, k](Node& nd) {
        for (int j = 0; j < k; ++j) {
            Node& p = *nd.parents[j];
            for (int i = 0; i < m; ++i) p.grad.at(i) += nd.grad.at(i, j);
        }
    });
}

Var mul_colvec(const Var& x, const Var& v) {
    if (x.value().rank() != 2 || v.value().rank() != 1 || v.value().dim(0) != x.value().dim(0))
        throw std::invalid_argument("mul_colvec: incompatible shapes");
    const int m = x.value().dim(0), n = x.value().dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = x.value().at(i, j) * v.value().at(i);
    return make_op(std::move(out), {x, v}, [m, n](Node& nd) {
        Node& px = *nd.parents[0];
        Node& pv = *nd.parents[1];
        for (int i = 0; i < m; ++i) {
            const double vi = pv.value.at(i);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double g = nd.grad.at(i, j);
                px.grad.at(i, j) += g * vi;
                acc += g * px.value.at(i, j);
            }
            pv.grad.at(i) += acc;
        }
    });
}

Var softmax_rows(const Var& x) {
    if (x.value().rank() != 2) throw std::invalid_argument("softmax_rows: rank-2 input required");
    const int m = x.value().dim(0), n = x.value().dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i) {
        double mx = x.value().at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, x.value().at(i, j));
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(x.value().at(i, j) - mx);
            out.at(i, j) = e;
            s += e;
        }
        for (int j = 0; j < n; ++j) out.at(i, j) /= s;
    }
    return make_op(std::move(out), {x}, [m, n](Node& nd) {
        Node& p = *nd.parents[0];
        for (int i = 0; i < m; ++i) {
            double dot = 0.0;
            for (int j = 0; j < n; ++j) dot += nd.grad.at(i, j) * nd.value.at(i, j);
            for (int j = 0; j < n; ++j)
                p.grad.at(i, j) += nd.value.at(i, j) * (nd.grad.at(i, j) - dot);
        }
    });
}

Var gather_rows(const Var& table, std::vector<int> idx) {
    if (table.value().rank() != 2) throw std::invalid_argument("gather_rows: rank-2 table required");
    const int rows = table.value().dim(0), n = table.value().dim(1);
    for (int r : idx)
        if (r < 0 || r >= rows) throw std::invalid_argument("gather_rows: row index out of range");
    const int m = static_cast<int>(idx.size());
    Tensor out({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = table.value().at(idx[static_cast<std::size_t>(i)], j);
    return make_op(std::move(out), {table}, [m, n, ix = std::move(idx)](Node& nd) {
        Node& p = *nd.parents[0];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                p.grad.at(ix[static_cast<std::size_t>(i)], j) += nd.grad.at(i, j);
    });
}

Var sum_all(const Var& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.value().size(); ++i) s += x.value()[i];
    return make_op(Tensor::scalar(s), {x}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double g = nd.grad[0];
        for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
    });
}

Var mean_all(const Var& x) {
    if (x.value().size() == 0) throw std::invalid_argument("mean_all: empty tensor");
    double s = 0.0;
    for (std::size_t i = 0; i < x.value().size(); ++i) s += x.value()[i];
    s /= static_cast<double>(x.value().size());
    return make_op(Tensor::scalar(s), {x}, [](Node& nd) {
        Node& p = *nd.parents[0];
        const double g = nd.grad[0] / static_cast<double>(p.grad.size());
        for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
    });
}

Var div_by_scalar(const Var& x, const Var& s) {
    if (s.value().size() != 1) throw std::invalid_argument("div_by_scalar: divisor must be scalar");
    const double sv = s.value()[0];
    Tensor v = Tensor::zeros_like(x.value());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.value()[i] / sv;
    return make_op(std::move(v), {x, s}, [](Node& nd) {
        Node& px = *nd.parents[0];
        Node& ps = *nd.parents[1];
        const double sv = ps.value[0];
        const double* g = nd.grad.data();
        double acc = 0.0;
        for (std::size_t i = 0; i < nd.grad.size(); ++i) {
            px.grad[i] += g[i] / sv;
            acc += g[i] * nd.value[i];
        }
        ps.grad[0] -= acc / sv;
    });
}

Var conv2d(const Var& x, const Var& k, const Var& b, int dil_h, int dil_w) {
    const Tensor& xv = x.value();
    const Tensor& kv = k.value();
    if (xv.rank() != 3 || kv.rank() != 4 || b.value().rank() != 1)
        throw std::invalid_argument("conv2d: expected x(H,W,Cin), k(kh,kw,Cin,Cout), b(Cout)");
    const int H = xv.dim(0), W = xv.dim(1), Cin = xv.dim(2);
    const int kh = kv.dim(0), kw = kv.dim(1), Cout = kv.dim(3);
    if (kv.dim(2) != Cin) throw std::invalid_argument("conv2d: channel mismatch");
    if (b.value().dim(0) != Cout) throw std::invalid_argument("conv2d: bias size mismatch");
    if (kh % 2 == 0 || kw % 2 == 0) throw std::invalid_argument("conv2d: kernel sides must be odd");
    if (dil_h < 1 || dil_w < 1) throw std::invalid_argument("conv2d: dilation must be >= 1");

    Tensor out({H, W, Cout});
    {
        const double* X = xv.data();
        const double* K = kv.data();
        const double* B = b.value().data();
        double* O = out.data();
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                double* o = O + (static_cast<std::size_t>(i) * W + j) * Cout;
                for (int c = 0; c < Cout; ++c) o[c] = B[c];
                for (int a = 0; a < kh; ++a) {
                    const int ii = i + dil_h * (a - kh / 2);
                    if (ii < 0 || ii >= H) continue;
                    for (int bb = 0; bb < kw; ++bb) {
                        const int jj = j + dil_w * (bb - kw / 2);
                        if (jj < 0 || jj >= W) continue;
                        const double* xp = X + (static_cast<std::size_t>(ii) * W + jj) * Cin;
                        const double* kp = K + (static_cast<std::size_t>(a) * kw + bb) * Cin * Cout;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const double xvl = xp[ci];
                            const double* kr = kp + static_cast<std::size_t>(ci) * Cout;
                            for (int c = 0; c < Cout; ++c) o[c] += xvl * kr[c];
                        }
                    }
                }
            }
    }
    return make_op(std::move(out), {x, k, b}, [H, W, Cin, kh, kw, Cout, dil_h, dil_w](Node& nd) {
        Node& px = *nd.parents[0];
        Node& pk = *nd.parents[1];
        Node& pb = *nd.parents[2];
        const double* G = nd.grad.data();
        const double* X = px.value.data();
        const double* K = pk.value.data();
        double* GX = px.grad.data();
        double* GK = pk.grad.data();
        double* GB = pb.grad.data();
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                const double* go = G + (static_cast<std::size_t>(i) * W + j) * Cout;
                for (int c = 0; c < Cout; ++c) GB[c] += go[c];
                for (int a = 0; a < kh; ++a) {
                    const int ii = i + dil_h * (a - kh / 2);
                    if (ii < 0 || ii >= H) continue;
                    for (int bb = 0; bb < kw; ++bb) {
                        const int jj = j + dil_w * (bb - kw / 2);
                        if (jj < 0 || jj >= W) continue;
                        const std::size_t xoff = (static_cast<std::size_t>(ii) * W + jj) * Cin;
                        const std::size_t koff = (static_cast<std::size_t>(a) * kw + bb) * Cin * Cout;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const double* kr = K + koff + static_cast<std::size_t>(ci) * Cout;
                            double* gkr = GK + koff + static_cast<std::size_t>(ci) * Cout;
                            const double xvl = X[xoff + ci];
                            double acc = 0.0;
                            for (int c = 0; c < Cout; ++c) {
                                const double g = go[c];
                                acc += kr[c] * g;
                                gkr[c] += xvl * g;
                            }
                            GX[xoff + ci] += acc;
                        }
                    }
                }
            }
    });
}

Var bce_with_logits(const Var& logits, const Tensor& targets) {
    if (!logits.value().same_shape(targets))
        throw std::invalid_argument("bce_with_logits: target shape mismatch " +
                                    logits.value().shape_str() + " vs " + targets.shape_str());
    const std::size_t n = targets.size();
    if (n == 0) throw std::invalid_argument("bce_with_logits: empty input");
    for (std::size_t i = 0; i < n; ++i)
        if (targets[i] != 0.0 && targets[i] != 1.0)
            throw std::invalid_argument("bce_with_logits: targets must be 0 or 1");
    constexpr double kLo = 1e-12;
    constexpr double kHi = 1.0 - 1e-12;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = 1.0 / (1.0 + std::exp(-logits.value()[i]));
        p = std::min(std::max(p, kLo), kHi);
        const double t = targets[i];
        s -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    s /= static_cast<double>(n);
    return make_op(Tensor::scalar(s), {logits}, [t = targets](Node& nd) {
        Node& p = *nd.parents[0];
        const std::size_t n = t.size();
        const double g = nd.grad[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double pr = 1.0 / (1.0 + std::exp(-p.value[i]));
            // Clamped probabilities contribute a constant, so no gradient.
            if (pr < kLo || pr > kHi) continue;
            p.grad[i] += g * (pr - t[i]);
        }
    });
}

} // namespace pl::ad
