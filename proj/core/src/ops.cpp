#include "pointcat/ops.hpp"

#include <algorithm>
#include <cmath>

#include "pointcat/costs.hpp"

namespace pointcat {

namespace {

void require_rank2(const tensor& t, const char* op) {
    if (!t.defined())
        throw shape_error(std::string(op) + ": undefined tensor");
    if (t.rank() != 2)
        throw shape_error(std::string(op) + ": rank-2 tensor required, got " + shape_str(t.shape()));
}

void require_same_shape(const tensor& a, const tensor& b, const char* op) {
    if (!a.defined() || !b.defined())
        throw shape_error(std::string(op) + ": undefined tensor");
    if (a.shape() != b.shape())
        throw shape_error(std::string(op) + ": shapes differ: " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
}

void require_channel_vector(const tensor& v, std::int64_t c, const char* op) {
    if (!v.defined() || v.rank() != 1 || v.dim(0) != c)
        throw shape_error(std::string(op) + ": expected vector of length " + std::to_string(c));
}

void check_finite_output(const std::vector<double>& v, const char* op) {
    if (!finite_checks_enabled()) return;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw numeric_error(std::string(op) + ": non-finite output at flat index " + std::to_string(i));
}

tensor make_result(shape_t shape, std::vector<double> vals, const char* op, std::vector<tensor> parents,
                   std::function<void(const tensor&)> bw) {
    check_finite_output(vals, op);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p.requires_grad();
    tensor out = tensor::from_values(std::move(shape), std::move(vals), grad_enabled() && rg);
    if (out.requires_grad()) {
        out.node = std::make_shared<tape_node>();
        out.node->op = op;
        out.node->parents = std::move(parents);
        out.node->backward = std::move(bw);
    }
    return out;
}

std::uint64_t u64(std::int64_t v) {
    return static_cast<std::uint64_t>(v);
}

}  // namespace

tensor matmul(const tensor& a, const tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a.cols() != b.rows())
        throw shape_error("matmul: inner dimensions disagree: " + shape_str(a.shape()) + " x " +
                          shape_str(b.shape()));
    const std::int64_t n = a.rows(), k = a.cols(), m = b.cols();
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> y(static_cast<std::size_t>(n * m), 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            double* yrow = y.data() + i * m;
            const double* brow = bv.data() + p * m;
            for (std::int64_t j = 0; j < m; ++j) yrow[j] += aip * brow[j];
        }
    record_macs(u64(n) * u64(k) * u64(m));
    return make_result({n, m}, std::move(y), "matmul", {a, b}, [a, b, n, k, m](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (a.requires_grad()) {
            auto& da = a.grad_buffer();
            const auto& bvv = b.values();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    const double* dyrow = dy.data() + i * m;
                    const double* brow = bvv.data() + p * m;
                    for (std::int64_t j = 0; j < m; ++j) s += dyrow[j] * brow[j];
                    da[i * k + p] += s;
                }
        }
        if (b.requires_grad()) {
            auto& db = b.grad_buffer();
            const auto& avv = a.values();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t p = 0; p < k; ++p) {
                    const double aip = avv[i * k + p];
                    double* dbrow = db.data() + p * m;
                    const double* dyrow = dy.data() + i * m;
                    for (std::int64_t j = 0; j < m; ++j) dbrow[j] += aip * dyrow[j];
                }
        }
    });
}

tensor transpose(const tensor& x) {
    require_rank2(x, "transpose");
    const std::int64_t n = x.rows(), m = x.cols();
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(n * m));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < m; ++j) y[j * n + i] = xv[i * m + j];
    return make_result({m, n}, std::move(y), "transpose", {x}, [x, n, m](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        auto& dx = x.grad_buffer();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < m; ++j) dx[i * m + j] += dy[j * n + i];
    });
}

tensor linear(const tensor& x, const tensor& w, const tensor& b) {
    require_rank2(x, "linear");
    require_rank2(w, "linear");
    if (x.cols() != w.rows())
        throw shape_error("linear: input width " + std::to_string(x.cols()) + " does not match weight " +
                          shape_str(w.shape()));
    const bool has_bias = b.defined();
    const std::int64_t n = x.rows(), cin = x.cols(), cout = w.cols();
    if (has_bias) require_channel_vector(b, cout, "linear");
    const auto& xv = x.values();
    const auto& wv = w.values();
    std::vector<double> y(static_cast<std::size_t>(n * cout), 0.0);
    if (has_bias) {
        const auto& bv = b.values();
        for (std::int64_t i = 0; i < n; ++i)
            std::copy(bv.begin(), bv.end(), y.begin() + i * cout);
    }
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t p = 0; p < cin; ++p) {
            const double xip = xv[i * cin + p];
            double* yrow = y.data() + i * cout;
            const double* wrow = wv.data() + p * cout;
            for (std::int64_t j = 0; j < cout; ++j) yrow[j] += xip * wrow[j];
        }
    record_macs(u64(n) * u64(cin) * u64(cout));
    std::vector<tensor> parents = has_bias ? std::vector<tensor>{x, w, b} : std::vector<tensor>{x, w};
    return make_result({n, cout}, std::move(y), "linear", std::move(parents),
                       [x, w, b, has_bias, n, cin, cout](const tensor& out) mutable {
                           const auto& dy = out.grad();
                           if (x.requires_grad()) {
                               auto& dx = x.grad_buffer();
                               const auto& wv2 = w.values();
                               for (std::int64_t i = 0; i < n; ++i)
                                   for (std::int64_t p = 0; p < cin; ++p) {
                                       double s = 0.0;
                                       const double* dyrow = dy.data() + i * cout;
                                       const double* wrow = wv2.data() + p * cout;
                                       for (std::int64_t j = 0; j < cout; ++j) s += dyrow[j] * wrow[j];
                                       dx[i * cin + p] += s;
                                   }
                           }
                           if (w.requires_grad()) {
                               auto& dw = w.grad_buffer();
                               const auto& xv2 = x.values();
                               for (std::int64_t i = 0; i < n; ++i)
                                   for (std::int64_t p = 0; p < cin; ++p) {
                                       const double xip = xv2[i * cin + p];
                                       double* dwrow = dw.data() + p * cout;
                                       const double* dyrow = dy.data() + i * cout;
                                       for (std::int64_t j = 0; j < cout; ++j) dwrow[j] += xip * dyrow[j];
                                   }
                           }
                           if (has_bias && b.requires_grad()) {
                               auto& db = b.grad_buffer();
                               for (std::int64_t i = 0; i < n; ++i)
                                   for (std::int64_t j = 0; j < cout; ++j) db[j] += dy[i * cout + j];
                           }
                       });
}

tensor add(const tensor& a, const tensor& b) {
    require_same_shape(a, b, "add");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] + bv[i];
    return make_result(a.shape(), std::move(y), "add", {a, b}, [a, b](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (a.requires_grad()) {
            auto& da = a.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        }
        if (b.requires_grad()) {
            auto& db = b.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
        }
    });
}

tensor sub(const tensor& a, const tensor& b) {
    require_same_shape(a, b, "sub");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] - bv[i];
    return make_result(a.shape(), std::move(y), "sub", {a, b}, [a, b](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (a.requires_grad()) {
            auto& da = a.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        }
        if (b.requires_grad()) {
            auto& db = b.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
        }
    });
}

tensor mul(const tensor& a, const tensor& b) {
    require_same_shape(a, b, "mul");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] * bv[i];
    record_macs(av.size());
    return make_result(a.shape(), std::move(y), "mul", {a, b}, [a, b](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (a.requires_grad()) {
            auto& da = a.grad_buffer();
            const auto& bvv = b.values();
            for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bvv[i];
        }
        if (b.requires_grad()) {
            auto& db = b.grad_buffer();
            const auto& avv = a.values();
            for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * avv[i];
        }
    });
}

tensor scale(const tensor& x, double c) {
    if (!x.defined()) throw shape_error("scale: undefined tensor");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = c * xv[i];
    record_macs(xv.size());
    return make_result(x.shape(), std::move(y), "scale", {x}, [x, c](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += c * dy[i];
    });
}

tensor add_const(const tensor& x, double c) {
    if (!x.defined()) throw shape_error("add_const: undefined tensor");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] + c;
    return make_result(x.shape(), std::move(y), "add_const", {x}, [x](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    });
}

tensor sub_bscalar(const tensor& x, const tensor& s) {
    if (!x.defined() || !s.defined()) throw shape_error("sub_bscalar: undefined tensor");
    if (s.numel() != 1) throw shape_error("sub_bscalar: scalar operand has shape " + shape_str(s.shape()));
    const double sv = s.values()[0];
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] - sv;
    return make_result(x.shape(), std::move(y), "sub_bscalar", {x, s}, [x, s](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (x.requires_grad()) {
            auto& dx = x.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
        }
        if (s.requires_grad()) {
            double acc = 0.0;
            for (double g : dy) acc += g;
            s.grad_buffer()[0] -= acc;
        }
    });
}

tensor div_bscalar(const tensor& x, const tensor& s) {
    if (!x.defined() || !s.defined()) throw shape_error("div_bscalar: undefined tensor");
    if (s.numel() != 1) throw shape_error("div_bscalar: scalar operand has shape " + shape_str(s.shape()));
    const double sv = s.values()[0];
    if (sv == 0.0) throw numeric_error("div_bscalar: division by zero");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] / sv;
    record_macs(xv.size());
    return make_result(x.shape(), std::move(y), "div_bscalar", {x, s}, [x, s, sv](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (x.requires_grad()) {
            auto& dx = x.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] / sv;
        }
        if (s.requires_grad()) {
            const auto& xvv = x.values();
            double acc = 0.0;
            for (std::size_t i = 0; i < dy.size(); ++i) acc += dy[i] * xvv[i];
            s.grad_buffer()[0] -= acc / (sv * sv);
        }
    });
}

tensor add_rowvec(const tensor& x, const tensor& v) {
    require_rank2(x, "add_rowvec");
    require_channel_vector(v, x.cols(), "add_rowvec");
    const std::int64_t n = x.rows(), c = x.cols();
    const auto& xv = x.values();
    const auto& vv = v.values();
    std::vector<double> y(xv.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < c; ++j) y[i * c + j] = xv[i * c + j] + vv[j];
    return make_result(x.shape(), std::move(y), "add_rowvec", {x, v}, [x, v, n, c](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (x.requires_grad()) {
            auto& dx = x.grad_buffer();
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
        }
        if (v.requires_grad()) {
            auto& dv = v.grad_buffer();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < c; ++j) dv[j] += dy[i * c + j];
        }
    });
}

tensor mul_rowvec(const tensor& x, const tensor& v) {
    require_rank2(x, "mul_rowvec");
    require_channel_vector(v, x.cols(), "mul_rowvec");
    const std::int64_t n = x.rows(), c = x.cols();
    const auto& xv = x.values();
    const auto& vv = v.values();
    std::vector<double> y(xv.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < c; ++j) y[i * c + j] = xv[i * c + j] * vv[j];
    record_macs(xv.size());
    return make_result(x.shape(), std::move(y), "mul_rowvec", {x, v}, [x, v, n, c](const tensor& out) mutable {
        const auto& dy = out.grad();
        if (x.requires_grad()) {
            auto& dx = x.grad_buffer();
            const auto& vvv = v.values();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < c; ++j) dx[i * c + j] += dy[i * c + j] * vvv[j];
        }
        if (v.requires_grad()) {
            auto& dv = v.grad_buffer();
            const auto& xvv = x.values();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < c; ++j) dv[j] += dy[i * c + j] * xvv[i * c + j];
        }
    });
}

tensor broadcast_rows(const tensor& x, std::int64_t n) {
    require_rank2(x, "broadcast_rows");
    if (x.rows() != 1) throw shape_error("broadcast_rows: expected [1,c], got " + shape_str(x.shape()));
    if (n < 1) throw shape_error("broadcast_rows: n must be >= 1");
    const std::int64_t c = x.cols();
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(n * c));
    for (std::int64_t i = 0; i < n; ++i) std::copy(xv.begin(), xv.end(), y.begin() + i * c);
    return make_result({n, c}, std::move(y), "broadcast_rows", {x}, [x, n, c](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        auto& dx = x.grad_buffer();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < c; ++j) dx[j] += dy[i * c + j];
    });
}

tensor relu(const tensor& x) {
    if (!x.defined()) throw shape_error("relu: undefined tensor");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    return make_result(x.shape(), std::move(y), "relu", {x}, [x](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        const auto& xvv = x.values();
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dy.size(); ++i)
            if (xvv[i] > 0.0) dx[i] += dy[i];
    });
}

tensor sqrt_elem(const tensor& x) {
    if (!x.defined()) throw shape_error("sqrt_elem: undefined tensor");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] < 0.0)
            throw numeric_error("sqrt_elem: negative input at flat index " + std::to_string(i));
        y[i] = std::sqrt(xv[i]);
    }
    return make_result(x.shape(), std::move(y), "sqrt_elem", {x}, [x](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        const auto& yv = out.values();
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dy.size(); ++i)
            if (yv[i] > 0.0) dx[i] += dy[i] / (2.0 * yv[i]);  // gradient at 0 defined as 0
    });
}

tensor sum_all(const tensor& x) {
    if (!x.defined()) throw shape_error("sum_all: undefined tensor");
    double s = 0.0;
    for (double v : x.values()) s += v;
    return make_result({1}, {s}, "sum_all", {x}, [x](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const double g = out.grad()[0];
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
    });
}

tensor mean_all(const tensor& x) {
    if (!x.defined()) throw shape_error("mean_all: undefined tensor");
    if (x.numel() == 0) throw shape_error("mean_all: empty tensor");
    const double inv_n = 1.0 / static_cast<double>(x.numel());
    double s = 0.0;
    for (double v : x.values()) s += v;
    return make_result({1}, {s * inv_n}, "mean_all", {x}, [x, inv_n](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const double g = out.grad()[0] * inv_n;
        auto& dx = x.grad_buffer();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
    });
}

tensor softmax_rows(const tensor& x) {
    require_rank2(x, "softmax_rows");
    const std::int64_t n = x.rows(), m = x.cols();
    if (m < 1) throw shape_error("softmax_rows: empty rows");
    const auto& xv = x.values();
    std::vector<double> y(xv.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const double* row = xv.data() + i * m;
        double mx = row[0];
        for (std::int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::int64_t j = 0; j < m; ++j) {
            const double e = std::exp(row[j] - mx);
            y[i * m + j] = e;
            z += e;
        }
        for (std::int64_t j = 0; j < m; ++j) y[i * m + j] /= z;
    }
    return make_result({n, m}, std::move(y), "softmax_rows", {x}, [x, n, m](const tensor& out) mutable {
        if (!x.requires_grad()) return;
        const auto& dy = out.grad();
        const auto& yv = out.values();
        auto& dx = x.grad_buffer();
        for (std::int64_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::int64_t j = 0; j < m; ++j) dot += dy[i * m + j] * yv[i * m + j];
            for (std::int64_t j = 0; j < m; ++j)
                dx[i * m + j] += yv[i * m + j] * (dy[i * m + j] - dot);
        }
    });
}

tensor layer_norm(const tensor& x, const tensor& gamma, const tensor& beta, double eps) {
    require_rank2(x, "layer_norm");
    const std::int64_t n = x.rows(), c = x.cols();
    require_channel_vector(gamma, c, "layer_norm");
    require_channel_vector(beta, c, "layer_norm");
    if (!(eps >= 0.0)) throw numeric_error("layer_norm: eps must be non-negative");
    const auto& xv = x.values();
    const auto& gv = gamma.values();
    const auto& bv = beta.values();
    std::vector<double> y(xv.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const double* row = xv.data() + i * c;
        double mean = 0.0;
        for (std::int64_t j = 0; j < c; ++j) mean += row[j];
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::int64_t j = 0; j < c; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(c);  // population variance
        if (var + eps <= 0.0)
            throw numeric_error("layer_norm: zero variance row " + std::to_string(i) + " with eps=0");
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::int64_t j = 0; j < c; ++j)
            y[i * c + j] = gv[j] * ((row[j] - mean) * inv) + bv[j];
    }
    return make_result({n, c}, std::move(y), "layer_norm", {x, gamma, beta},
                       [x, gamma, beta, eps, n, c](const tensor& out) mutable {
                           const auto& dy = out.grad();
                           const auto& xvv = x.values();
                           const auto& gvv = gamma.values();
                           std::vector<double> xhat(static_cast<std::size_t>(c));
                           std::vector<double> dxh(static_cast<std::size_t>(c));
                           for (std::int64_t i = 0; i < n; ++i) {
                               const double* row = xvv.data() + i * c;
                               double mean = 0.0;
                               for (std::int64_t j = 0; j < c; ++j) mean += row[j];
                               mean /= static_cast<double>(c);
                               double var = 0.0;
                               for (std::int64_t j = 0; j < c; ++j) {
                                   const double d = row[j] - mean;
                                   var += d * d;
                               }
                               var /= static_cast<double>(c);
                               const double inv = 1.0 / std::sqrt(var + eps);
                               for (std::int64_t j = 0; j < c; ++j) xhat[j] = (row[j] - mean) * inv;
                               if (gamma.requires_grad()) {
                                   auto& dg = gamma.grad_buffer();
                                   for (std::int64_t j = 0; j < c; ++j) dg[j] += dy[i * c + j] * xhat[j];
                               }
                               if (beta.requires_grad()) {
                                   auto& db = beta.grad_buffer();
                                   for (std::int64_t j = 0; j < c; ++j) db[j] += dy[i * c + j];
                               }
                               if (x.requires_grad()) {
                                   auto& dx = x.grad_buffer();
                                   double m1 = 0.0, m2 = 0.0;
                                   for (std::int64_t j = 0; j < c; ++j) {
                                       dxh[j] = dy[i * c + j] * gvv[j];
                                       m1 += dxh[j];
                                       m2 += dxh[j] * xhat[j];
                                   }
                                   m1 /= static_cast<double>(c);
                                   m2 /= static_cast<double>(c);
                                   for (std::int64_t j = 0; j < c; ++j)
                                       dx[i * c + j] += inv * (dxh[j] - m1 - xhat[j] * m2);
                               }
                           }
                       });
}

tensor max_pool_groups(const tensor& x, std::int64_t k, std::vector<std::int64_t>* argmax) {
    require_rank2(x, "max_pool_groups");
    if (k < 1) throw shape_error("max_pool_groups: k must be >= 1");
    if (x.rows() % k != 0)
        throw shape_error("max_pool_groups: " + std::to_string(x.rows()) + " rows not divisible by k=" +
                          std::to_string(k));
    const std::int64_t n = x.rows() / k, c = x.cols();
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(n * c));
    std::vector<std::int64_t> arg(static_cast<std::size_t>(n * c));
    for (std::int64_t g = 0; g < n; ++g)
        for (std::int64_t j = 0; j < c; ++j) {
            std::int64_t best_row = g * k;
            double best = xv[best_row * c + j];
            for (std::int64_t t = 1; t < k; ++t) {
                const std::int64_t r = g * k + t;
                const double v = xv[r * c + j];
                if (v > best) {  // strict: ties keep the lowest row index
                    best = v;
                    best_row = r;
                }
            }
            y[g * c + j] = best;
            arg[g * c + j] = best_row;
        }
    if (argmax) *argmax = arg;
    return make_result({n, c}, std::move(y), "max_pool_groups", {x},
                       [x, arg = std::move(arg), n, c](const tensor& out) mutable {
                           if (!x.requires_grad()) return;
                           const auto& dy = out.grad();
                           auto& dx = x.grad_buffer();
                           for (std::int64_t g = 0; g < n; ++g)
                               for (std::int64_t j = 0; j < c; ++j)
                                   dx[arg[g * c + j] * c + j] += dy[g * c + j];
                       });
}

tensor max_pool_rows(const tensor& x, std::vector<std::int64_t>* argmax) {
    require_rank2(x, "max_pool_rows");
    return max_pool_groups(x, x.rows(), argmax);
}

tensor cross_entropy_mean(const tensor& logits, const std::vector<int>& labels) {
    require_rank2(logits, "cross_entropy_mean");
    const std::int64_t n = logits.rows(), m = logits.cols();
    if (static_cast<std::int64_t>(labels.size()) != n)
        throw shape_error("cross_entropy_mean: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(n) + " rows");
    const auto& xv = logits.values();
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const int lab = labels[i];
        if (lab < 0 || lab >= m)
            throw index_error("cross_entropy_mean: label " + std::to_string(lab) + " outside [0," +
                              std::to_string(m) + ") at row " + std::to_string(i));
        const double* row = xv.data() + i * m;
        double mx = row[0];
        for (std::int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::int64_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
        total += (mx + std::log(z)) - row[lab];  // log-sum-exp minus true logit
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    return make_result({1}, {total * inv_n}, "cross_entropy_mean", {logits},
                       [logits, labels, n, m, inv_n](const tensor& out) mutable {
                           if (!logits.requires_grad()) return;
                           const double g = out.grad()[0] * inv_n;
                           const auto& xvv = logits.values();
                           auto& dx = logits.grad_buffer();
                           for (std::int64_t i = 0; i < n; ++i) {
                               const double* row = xvv.data() + i * m;
                               double mx = row[0];
                               for (std::int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
                               double z = 0.0;
                               for (std::int64_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
                               for (std::int64_t j = 0; j < m; ++j) {
                                   const double p = std::exp(row[j] - mx) / z;
                                   dx[i * m + j] += g * (p - (j == labels[i] ? 1.0 : 0.0));
                               }
                           }
                       });
}

tensor gather_rows(const tensor& x, const std::vector<std::int64_t>& idx) {
    require_rank2(x, "gather_rows");
    const std::int64_t n = x.rows(), c = x.cols();
    const std::int64_t m = static_cast<std::int64_t>(idx.size());
    if (m == 0) throw shape_error("gather_rows: empty index list");
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(m * c));
    for (std::int64_t j = 0; j < m; ++j) {
        const std::int64_t r = idx[j];
        if (r < 0 || r >= n)
            throw index_error("gather_rows: index " + std::to_string(r) + " outside [0," +
                              std::to_string(n) + ") at position " + std::to_string(j));
        std::copy(xv.begin() + r * c, xv.begin() + (r + 1) * c, y.begin() + j * c);
    }
    return make_result({m, c}, std::move(y), "gather_rows", {x},
                       [x, idx, m, c](const tensor& out) mutable {
                           if (!x.requires_grad()) return;
                           const auto& dy = out.grad();
                           auto& dx = x.grad_buffer();
                           for (std::int64_t j = 0; j < m; ++j)
                               for (std::int64_t ch = 0; ch < c; ++ch)
                                   dx[idx[j] * c + ch] += dy[j * c + ch];
                       });
}

tensor interpolate_rows(const tensor& x, const std::vector<std::int64_t>& idx,
                        const std::vector<double>& w, std::int64_t k) {
    require_rank2(x, "interpolate_rows");
    if (k < 1) throw shape_error("interpolate_rows: k must be >= 1");
    if (idx.size() != w.size())
        throw shape_error("interpolate_rows: index/weight lengths differ");
    if (idx.empty() || static_cast<std::int64_t>(idx.size()) % k != 0)
        throw shape_error("interpolate_rows: index count not a multiple of k");
    const std::int64_t n = x.rows(), c = x.cols();
    const std::int64_t m = static_cast<std::int64_t>(idx.size()) / k;
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(m * c), 0.0);
    for (std::int64_t j = 0; j < m; ++j)
        for (std::int64_t t = 0; t < k; ++t) {
            const std::int64_t r = idx[j * k + t];
            if (r < 0 || r >= n)
                throw index_error("interpolate_rows: index " + std::to_string(r) + " outside [0," +
                                  std::to_string(n) + ")");
            const double wt = w[j * k + t];
            const double* src = xv.data() + r * c;
            double* dst = y.data() + j * c;
            for (std::int64_t ch = 0; ch < c; ++ch) dst[ch] += wt * src[ch];
        }
    record_macs(u64(m) * u64(k) * u64(c));
    return make_result({m, c}, std::move(y), "interpolate_rows", {x},
                       [x, idx, w, k, m, c](const tensor& out) mutable {
                           if (!x.requires_grad()) return;
                           const auto& dy = out.grad();
                           auto& dx = x.grad_buffer();
                           for (std::int64_t j = 0; j < m; ++j)
                               for (std::int64_t t = 0; t < k; ++t) {
                                   const std::int64_t r = idx[j * k + t];
                                   const double wt = w[j * k + t];
                                   for (std::int64_t ch = 0; ch < c; ++ch)
                                       dx[r * c + ch] += wt * dy[j * c + ch];
                               }
                       });
}

tensor concat_rows(const std::vector<tensor>& parts) {
    if (parts.empty()) throw shape_error("concat_rows: no parts");
    std::int64_t c = -1, total = 0;
    for (const auto& p : parts) {
        require_rank2(p, "concat_rows");
        if (c < 0) c = p.cols();
        if (p.cols() != c)
            throw shape_error("concat_rows: column counts differ: " + std::to_string(c) + " vs " +
                              std::to_string(p.cols()));
        total += p.rows();
    }
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(total * c));
    for (const auto& p : parts) y.insert(y.end(), p.values().begin(), p.values().end());
    return make_result({total, c}, std::move(y), "concat_rows", parts,
                       [parts, c](const tensor& out) mutable {
                           const auto& dy = out.grad();
                           std::int64_t row0 = 0;
                           for (auto& p : parts) {
                               if (p.requires_grad()) {
                                   auto& dp = p.grad_buffer();
                                   const std::size_t count = dp.size();
                                   const double* src = dy.data() + row0 * c;
                                   for (std::size_t i = 0; i < count; ++i) dp[i] += src[i];
                               }
                               row0 += p.rows();
                           }
                       });
}

tensor concat_rows(const tensor& a, const tensor& b) {
    return concat_rows(std::vector<tensor>{a, b});
}

tensor concat_cols(const std::vector<tensor>& parts) {
    if (parts.empty()) throw shape_error("concat_cols: no parts");
    std::int64_t n = -1, total = 0;
    for (const auto& p : parts) {
        require_rank2(p, "concat_cols");
        if (n < 0) n = p.rows();
        if (p.rows() != n)
            throw shape_error("concat_cols: row counts differ: " + std::to_string(n) + " vs " +
                              std::to_string(p.rows()));
        total += p.cols();
    }
    std::vector<double> y(static_cast<std::size_t>(n * total));
    std::int64_t col0 = 0;
    for (const auto& p : parts) {
        const std::int64_t pc = p.cols();
        const auto& pv = p.values();
        for (std::int64_t i = 0; i < n; ++i)
            std::copy(pv.begin() + i * pc, pv.begin() + (i + 1) * pc, y.begin() + i * total + col0);
        col0 += pc;
    }
    return make_result({n, total}, std::move(y), "concat_cols", parts,
                       [parts, n, total](const tensor& out) mutable {
                           const auto& dy = out.grad();
                           std::int64_t col0 = 0;
                           for (auto& p : parts) {
                               const std::int64_t pc = p.cols();
                               if (p.requires_grad()) {
                                   auto& dp = p.grad_buffer();
                                   for (std::int64_t i = 0; i < n; ++i)
                                       for (std::int64_t j = 0; j < pc; ++j)
                                           dp[i * pc + j] += dy[i * total + col0 + j];
                               }
                               col0 += pc;
                           }
                       });
}

tensor concat_cols(const tensor& a, const tensor& b) {
    return concat_cols(std::vector<tensor>{a, b});
}

tensor slice_rows(const tensor& x, std::int64_t row0, std::int64_t nrows) {
    require_rank2(x, "slice_rows");
    if (row0 < 0 || nrows < 1 || row0 + nrows > x.rows())
        throw index_error("slice_rows: [" + std::to_string(row0) + "," + std::to_string(row0 + nrows) +
                          ") outside 0.." + std::to_string(x.rows()));
    const std::int64_t c = x.cols();
    const auto& xv = x.values();
    std::vector<double> y(xv.begin() + row0 * c, xv.begin() + (row0 + nrows) * c);
    return make_result({nrows, c}, std::move(y), "slice_rows", {x},
                       [x, row0, nrows, c](const tensor& out) mutable {
                           if (!x.requires_grad()) return;
                           const auto& dy = out.grad();
                           auto& dx = x.grad_buffer();
                           for (std::int64_t i = 0; i < nrows; ++i)
                               for (std::int64_t j = 0; j < c; ++j)
                                   dx[(row0 + i) * c + j] += dy[i * c + j];
                       });
}

tensor slice_cols(const tensor& x, std::int64_t col0, std::int64_t ncols) {
    require_rank2(x, "slice_cols");
    if (col0 < 0 || ncols < 1 || col0 + ncols > x.cols())
        throw index_error("slice_cols: [" + std::to_string(col0) + "," + std::to_string(col0 + ncols) +
                          ") outside 0.." + std::to_string(x.cols()));
    const std::int64_t n = x.rows(), c = x.cols();
    const auto& xv = x.values();
    std::vector<double> y(static_cast<std::size_t>(n * ncols));
    for (std::int64_t i = 0; i < n; ++i)
        std::copy(xv.begin() + i * c + col0, xv.begin() + i * c + col0 + ncols, y.begin() + i * ncols);
    return make_result({n, ncols}, std::move(y), "slice_cols", {x},
                       [x, col0, ncols, n, c](const tensor& out) mutable {
                           if (!x.requires_grad()) return;
                           const auto& dy = out.grad();
                           auto& dx = x.grad_buffer();
                           for (std::int64_t i = 0; i < n; ++i)
                               for (std::int64_t j = 0; j < ncols; ++j)
                                   dx[i * c + col0 + j] += dy[i * ncols + j];
                       });
}

}  // namespace pointcat
