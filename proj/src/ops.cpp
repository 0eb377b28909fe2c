#include "freqcast/ops.hpp"

#include "freqcast/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace freqcast {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool track(std::initializer_list<Tensor> inputs) {
    if (!grad_enabled()) return false;
    for (const Tensor& t : inputs) {
        if (t.requires_grad()) return true;
    }
    return false;
}

void attach(Tensor& out, std::vector<Tensor> parents,
            std::function<void(const Tensor&)> backward) {
    auto node = std::make_shared<GraphNode>();
    node->parents = std::move(parents);
    node->backward = std::move(backward);
    out.set_node(std::move(node));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

const std::vector<double>& out_grad(const Tensor& out) {
    const std::vector<double>* g = out.grad_if_any();
    if (g == nullptr) {
        throw std::logic_error("backward reached a node without an output gradient");
    }
    return *g;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
    Tensor out(a.shape(), std::move(v), track({a, b}));
    if (out.requires_grad()) {
        attach(out, {a, b}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            for (Tensor& p : o.node()->parents) {
                if (!p.requires_grad()) continue;
                auto& pg = p.grad();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
            }
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
    Tensor out(a.shape(), std::move(v), track({a, b}));
    if (out.requires_grad()) {
        attach(out, {a, b}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& ps = o.node()->parents;
            if (ps[0].requires_grad()) {
                auto& pg = ps[0].grad();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
            }
            if (ps[1].requires_grad()) {
                auto& pg = ps[1].grad();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] -= g[i];
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
    Tensor out(a.shape(), std::move(v), track({a, b}));
    if (out.requires_grad()) {
        attach(out, {a, b}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& ps = o.node()->parents;
            if (ps[0].requires_grad()) {
                auto& pg = ps[0].grad();
                const auto& bd = ps[1].data();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * bd[i];
            }
            if (ps[1].requires_grad()) {
                auto& pg = ps[1].grad();
                const auto& ad = ps[0].data();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * ad[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& x, double c) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.data()[i] * c;
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [c](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * c;
        });
    }
    return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& bias) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    if (bias.size() != c) {
        throw std::invalid_argument("add_rowvec: bias length does not match columns");
    }
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            v[i * c + j] = x.data()[i * c + j] + bias.data()[j];
        }
    }
    Tensor out(x.shape(), std::move(v), track({x, bias}));
    if (out.requires_grad()) {
        attach(out, {x, bias}, [r, c](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& ps = o.node()->parents;
            if (ps[0].requires_grad()) {
                auto& pg = ps[0].grad();
                for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
            }
            if (ps[1].requires_grad()) {
                auto& pg = ps[1].grad();
                for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < c; ++j) pg[j] += g[i * c + j];
                }
            }
        });
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.rows() != n) {
        throw std::invalid_argument("matmul: inner dimensions do not match");
    }
    const std::size_t p = b.cols();
    std::vector<double> v(m * p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a.data()[i * n + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < p; ++j) {
                v[i * p + j] += aik * b.data()[k * p + j];
            }
        }
    }
    Tensor out({m, p}, std::move(v), track({a, b}));
    if (out.requires_grad()) {
        attach(out, {a, b}, [m, n, p](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& ps = o.node()->parents;
            if (ps[0].requires_grad()) {
                auto& pg = ps[0].grad();
                const auto& bd = ps[1].data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < p; ++j) {
                        const double gij = g[i * p + j];
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < n; ++k) {
                            pg[i * n + k] += gij * bd[k * p + j];
                        }
                    }
                }
            }
            if (ps[1].requires_grad()) {
                auto& pg = ps[1].grad();
                const auto& ad = ps[0].data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double aik = ad[i * n + k];
                        if (aik == 0.0) continue;
                        for (std::size_t j = 0; j < p; ++j) {
                            pg[k * p + j] += aik * g[i * p + j];
                        }
                    }
                }
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& x) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) v[j * r + i] = x.data()[i * c + j];
    }
    Tensor out({c, r}, std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [r, c](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < c; ++j) pg[i * c + j] += g[j * r + i];
            }
        });
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x.data()[i])) {
            throw std::invalid_argument("softmax_rows: non-finite input");
        }
    }
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = x.data().data() + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            v[i * c + j] = std::exp(row[j] - mx);
            sum += v[i * c + j];
        }
        for (std::size_t j = 0; j < c; ++j) v[i * c + j] /= sum;
    }
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [r, c](const Tensor& o) {
            const auto& g = out_grad(o);
            const auto& y = o.data();
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < r; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
                for (std::size_t j = 0; j < c; ++j) {
                    pg[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
                }
            }
        });
    }
    return out;
}

Tensor gelu(const Tensor& x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double xv = x.data()[i];
        v[i] = 0.5 * xv * (1.0 + std::erf(xv / std::sqrt(2.0)));
    }
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            Tensor& p = o.node()->parents[0];
            auto& pg = p.grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double xv = p.data()[i];
                const double cdf = 0.5 * (1.0 + std::erf(xv / std::sqrt(2.0)));
                const double pdf = std::exp(-0.5 * xv * xv) / std::sqrt(2.0 * kPi);
                pg[i] += g[i] * (cdf + xv * pdf);
            }
        });
    }
    return out;
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double xv = x.data()[i];
        v[i] = xv >= 0.0 ? 1.0 / (1.0 + std::exp(-xv))
                         : std::exp(xv) / (1.0 + std::exp(xv));
    }
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            const auto& y = o.data();
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                pg[i] += g[i] * y[i] * (1.0 - y[i]);
            }
        });
    }
    return out;
}

Tensor exp_elem(const Tensor& x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(x.data()[i]);
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [](const Tensor& o) {
            const auto& g = out_grad(o);
            const auto& y = o.data();
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * y[i];
        });
    }
    return out;
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s, track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [](const Tensor& o) {
            const double g = out_grad(o)[0];
            auto& pg = o.node()->parents[0].grad();
            for (double& v : pg) v += g;
        });
    }
    return out;
}

Tensor mean_all(const Tensor& x) {
    if (x.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
    double s = 0.0;
    for (double v : x.data()) s += v;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    Tensor out = Tensor::scalar(s * inv_n, track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [inv_n](const Tensor& o) {
            const double g = out_grad(o)[0] * inv_n;
            auto& pg = o.node()->parents[0].grad();
            for (double& v : pg) v += g;
        });
    }
    return out;
}

Tensor mean_rows(const Tensor& x) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    if (r == 0) throw std::invalid_argument("mean_rows: empty tensor");
    std::vector<double> v(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) v[j] += x.data()[i * c + j];
    }
    const double inv_r = 1.0 / static_cast<double>(r);
    for (double& e : v) e *= inv_r;
    Tensor out({1, c}, std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [r, c, inv_r](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < c; ++j) pg[i * c + j] += g[j] * inv_r;
            }
        });
    }
    return out;
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "mse_loss");
    if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty tensor");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        s += d * d;
    }
    Tensor out = Tensor::scalar(s * inv_n, track({pred, target}));
    if (out.requires_grad()) {
        attach(out, {pred, target}, [inv_n](const Tensor& o) {
            const double g = out_grad(o)[0];
            auto& ps = o.node()->parents;
            const auto& pd = ps[0].data();
            const auto& td = ps[1].data();
            for (std::size_t i = 0; i < pd.size(); ++i) {
                const double d = 2.0 * (pd[i] - td[i]) * inv_n * g;
                if (ps[0].requires_grad()) ps[0].grad()[i] += d;
                if (ps[1].requires_grad()) ps[1].grad()[i] -= d;
            }
        });
    }
    return out;
}

Tensor l1_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "l1_loss");
    if (pred.size() == 0) throw std::invalid_argument("l1_loss: empty tensor");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        s += std::abs(pred.data()[i] - target.data()[i]);
    }
    Tensor out = Tensor::scalar(s * inv_n, track({pred, target}));
    if (out.requires_grad()) {
        attach(out, {pred, target}, [inv_n](const Tensor& o) {
            const double g = out_grad(o)[0];
            auto& ps = o.node()->parents;
            const auto& pd = ps[0].data();
            const auto& td = ps[1].data();
            for (std::size_t i = 0; i < pd.size(); ++i) {
                const double diff = pd[i] - td[i];
                const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                const double d = sgn * inv_n * g;
                if (ps[0].requires_grad()) ps[0].grad()[i] += d;
                if (ps[1].requires_grad()) ps[1].grad()[i] -= d;
            }
        });
    }
    return out;
}

Tensor bce_loss(const Tensor& prob, const Tensor& target) {
    check_same_shape(prob, target, "bce_loss");
    if (prob.size() == 0) throw std::invalid_argument("bce_loss: empty tensor");
    constexpr double kEps = 1e-12;
    const double inv_n = 1.0 / static_cast<double>(prob.size());
    double s = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double p = std::clamp(prob.data()[i], kEps, 1.0 - kEps);
        const double y = target.data()[i];
        s -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    Tensor out = Tensor::scalar(s * inv_n, track({prob, target}));
    if (out.requires_grad()) {
        attach(out, {prob, target}, [inv_n](const Tensor& o) {
            const double g = out_grad(o)[0];
            auto& ps = o.node()->parents;
            if (!ps[0].requires_grad()) return;
            auto& pg = ps[0].grad();
            const auto& pd = ps[0].data();
            const auto& td = ps[1].data();
            for (std::size_t i = 0; i < pd.size(); ++i) {
                if (pd[i] <= kEps || pd[i] >= 1.0 - kEps) continue;
                pg[i] += g * inv_n * (-td[i] / pd[i] + (1.0 - td[i]) / (1.0 - pd[i]));
            }
        });
    }
    return out;
}

Tensor kl_gaussian(const Tensor& mu, const Tensor& logvar) {
    check_same_shape(mu, logvar, "kl_gaussian");
    if (mu.size() == 0) throw std::invalid_argument("kl_gaussian: empty tensor");
    const double inv_n = 1.0 / static_cast<double>(mu.size());
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.data()[i];
        const double lv = logvar.data()[i];
        s += 0.5 * (std::exp(lv) + m * m - 1.0 - lv);
    }
    Tensor out = Tensor::scalar(s * inv_n, track({mu, logvar}));
    if (out.requires_grad()) {
        attach(out, {mu, logvar}, [inv_n](const Tensor& o) {
            const double g = out_grad(o)[0];
            auto& ps = o.node()->parents;
            const auto& md = ps[0].data();
            const auto& ld = ps[1].data();
            for (std::size_t i = 0; i < md.size(); ++i) {
                if (ps[0].requires_grad()) ps[0].grad()[i] += g * inv_n * md[i];
                if (ps[1].requires_grad()) {
                    ps[1].grad()[i] += g * inv_n * 0.5 * (std::exp(ld[i]) - 1.0);
                }
            }
        });
    }
    return out;
}

Tensor slice_cols(const Tensor& x, std::size_t col_begin, std::size_t col_end) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    if (col_begin >= col_end || col_end > c) {
        throw std::invalid_argument("slice_cols: invalid column range");
    }
    const std::size_t w = col_end - col_begin;
    std::vector<double> v(r * w);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            v[i * w + j] = x.data()[i * c + col_begin + j];
        }
    }
    Tensor out({r, w}, std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [r, c, w, col_begin](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < w; ++j) {
                    pg[i * c + col_begin + j] += g[i * w + j];
                }
            }
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const std::size_t r = parts[0].rows();
    std::size_t total = 0;
    bool needs_grad = false;
    for (const Tensor& p : parts) {
        if (p.rows() != r) {
            throw std::invalid_argument("concat_cols: row count mismatch");
        }
        total += p.cols();
        needs_grad = needs_grad || p.requires_grad();
    }
    std::vector<double> v(r * total);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        const std::size_t pc = p.cols();
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < pc; ++j) {
                v[i * total + off + j] = p.data()[i * pc + j];
            }
        }
        off += pc;
    }
    Tensor out({r, total}, std::move(v), grad_enabled() && needs_grad);
    if (out.requires_grad()) {
        attach(out, parts, [r, total](const Tensor& o) {
            const auto& g = out_grad(o);
            std::size_t off = 0;
            for (Tensor& p : o.node()->parents) {
                const std::size_t pc = p.cols();
                if (p.requires_grad()) {
                    auto& pg = p.grad();
                    for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t j = 0; j < pc; ++j) {
                            pg[i * pc + j] += g[i * total + off + j];
                        }
                    }
                }
                off += pc;
            }
        });
    }
    return out;
}

Tensor dropout(const Tensor& x, double rate, RngState& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout: rate must be in [0, 1)");
    }
    if (!training || rate == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(x.size());
    for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.data()[i] * mask[i];
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [mask = std::move(mask)](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i] * mask[i];
        });
    }
    return out;
}

Tensor causal_moving_average(const Tensor& x, std::size_t window) {
    if (window == 0) throw std::invalid_argument("causal_moving_average: window must be positive");
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    const double inv_w = 1.0 / static_cast<double>(window);
    std::vector<double> v(x.size(), 0.0);
    for (std::size_t j = 0; j < c; ++j) {
        for (std::size_t t = 0; t < r; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < window; ++i) {
                const std::size_t src = t >= i ? t - i : 0;
                s += x.data()[src * c + j];
            }
            v[t * c + j] = s * inv_w;
        }
    }
    Tensor out(x.shape(), std::move(v), track({x}));
    if (out.requires_grad()) {
        attach(out, {x}, [r, c, window, inv_w](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            for (std::size_t j = 0; j < c; ++j) {
                for (std::size_t t = 0; t < r; ++t) {
                    const double gv = g[t * c + j] * inv_w;
                    for (std::size_t i = 0; i < window; ++i) {
                        const std::size_t src = t >= i ? t - i : 0;
                        pg[src * c + j] += gv;
                    }
                }
            }
        });
    }
    return out;
}

namespace {

// Unnormalized transform of one complex column; invert=true uses the e^{+i...}
// kernel without the 1/N factor.
void transform_col(std::vector<std::complex<double>>& buf, bool invert) {
    fft_complex(buf, invert);
}

} // namespace

DftPair dft_cols(const Tensor& x) {
    const std::size_t r = x.rows();
    const std::size_t c = x.cols();
    if (r == 0) throw std::invalid_argument("dft_cols: empty signal");
    std::vector<double> re(r * c), im(r * c);
    std::vector<std::complex<double>> buf(r);
    for (std::size_t j = 0; j < c; ++j) {
        for (std::size_t t = 0; t < r; ++t) buf[t] = x.data()[t * c + j];
        transform_col(buf, false);
        for (std::size_t k = 0; k < r; ++k) {
            re[k * c + j] = buf[k].real();
            im[k * c + j] = buf[k].imag();
        }
    }
    const bool rg = track({x});
    DftPair out{Tensor({r, c}, std::move(re), rg), Tensor({r, c}, std::move(im), rg)};
    if (rg) {
        // The forward map is linear, so each output propagates independently:
        // d x = Re[conj-kernel transform of g_re] from the real part and
        // d x = -Im[conj-kernel transform of g_im] from the imaginary part.
        attach(out.re, {x}, [r, c](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            std::vector<std::complex<double>> buf(r);
            for (std::size_t j = 0; j < c; ++j) {
                for (std::size_t k = 0; k < r; ++k) buf[k] = g[k * c + j];
                transform_col(buf, true);
                for (std::size_t t = 0; t < r; ++t) pg[t * c + j] += buf[t].real();
            }
        });
        attach(out.im, {x}, [r, c](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& pg = o.node()->parents[0].grad();
            std::vector<std::complex<double>> buf(r);
            for (std::size_t j = 0; j < c; ++j) {
                for (std::size_t k = 0; k < r; ++k) buf[k] = g[k * c + j];
                transform_col(buf, true);
                for (std::size_t t = 0; t < r; ++t) pg[t * c + j] -= buf[t].imag();
            }
        });
    }
    return out;
}

Tensor idft_real_cols(const Tensor& re, const Tensor& im) {
    check_same_shape(re, im, "idft_real_cols");
    const std::size_t r = re.rows();
    const std::size_t c = re.cols();
    if (r == 0) throw std::invalid_argument("idft_real_cols: empty spectrum");
    const double inv_n = 1.0 / static_cast<double>(r);
    std::vector<double> v(r * c);
    std::vector<std::complex<double>> buf(r);
    for (std::size_t j = 0; j < c; ++j) {
        for (std::size_t k = 0; k < r; ++k) {
            buf[k] = {re.data()[k * c + j], im.data()[k * c + j]};
        }
        transform_col(buf, true);
        for (std::size_t t = 0; t < r; ++t) v[t * c + j] = buf[t].real() * inv_n;
    }
    Tensor out({r, c}, std::move(v), track({re, im}));
    if (out.requires_grad()) {
        // y_t = (1/N) sum_k (re_k cos(2 pi k t / N) - im_k sin(2 pi k t / N)),
        // so d re = (1/N) Re[forward transform of g] and
        //    d im = (1/N) Im[forward transform of g].
        attach(out, {re, im}, [r, c, inv_n](const Tensor& o) {
            const auto& g = out_grad(o);
            auto& ps = o.node()->parents;
            std::vector<std::complex<double>> buf(r);
            for (std::size_t j = 0; j < c; ++j) {
                for (std::size_t t = 0; t < r; ++t) buf[t] = g[t * c + j];
                transform_col(buf, false);
                if (ps[0].requires_grad()) {
                    auto& pg = ps[0].grad();
                    for (std::size_t k = 0; k < r; ++k) {
                        pg[k * c + j] += buf[k].real() * inv_n;
                    }
                }
                if (ps[1].requires_grad()) {
                    auto& pg = ps[1].grad();
                    for (std::size_t k = 0; k < r; ++k) {
                        pg[k * c + j] += buf[k].imag() * inv_n;
                    }
                }
            }
        });
    }
    return out;
}

DftPair frequency_filter(const Tensor& re, const Tensor& im, const Tensor& w_re,
                         const Tensor& w_im, const std::vector<std::size_t>& freqs) {
    check_same_shape(re, im, "frequency_filter");
    check_same_shape(w_re, w_im, "frequency_filter weights");
    const std::size_t n = re.rows();
    const std::size_t c = re.cols();
    if (w_re.rows() != freqs.size() || w_re.cols() != c) {
        throw std::invalid_argument("frequency_filter: weight shape does not match modes");
    }
    for (std::size_t f : freqs) {
        if (f > n / 2) {
            throw std::invalid_argument("frequency_filter: frequency index out of range");
        }
    }
    std::vector<double> out_re(n * c, 0.0), out_im(n * c, 0.0);
    for (std::size_t idx = 0; idx < freqs.size(); ++idx) {
        const std::size_t f = freqs[idx];
        const std::size_t mirror = f == 0 ? 0 : n - f;
        const bool self_paired = (f == mirror);
        for (std::size_t j = 0; j < c; ++j) {
            const double a = w_re.data()[idx * c + j];
            const double b = self_paired ? 0.0 : w_im.data()[idx * c + j];
            const double xr = re.data()[f * c + j];
            const double xi = im.data()[f * c + j];
            out_re[f * c + j] = a * xr - b * xi;
            out_im[f * c + j] = a * xi + b * xr;
            if (!self_paired) {
                const double mr = re.data()[mirror * c + j];
                const double mi = im.data()[mirror * c + j];
                out_re[mirror * c + j] = a * mr + b * mi;
                out_im[mirror * c + j] = a * mi - b * mr;
            }
        }
    }
    const bool rg = track({re, im, w_re, w_im});
    DftPair out{Tensor({n, c}, std::move(out_re), rg),
                Tensor({n, c}, std::move(out_im), rg)};
    if (!rg) return out;

    // Both outputs share the four parents; each backward handles the slice of
    // the chain rule contributed by its own gradient. sign = +1 for the bin at
    // f (weight w) and -1 for the mirror bin (weight conj(w)).
    auto accumulate = [n, c, freqs](const Tensor& o, bool from_real) {
        const auto& g = out_grad(o);
        auto& ps = o.node()->parents;
        Tensor& t_re = ps[0];
        Tensor& t_im = ps[1];
        Tensor& t_wre = ps[2];
        Tensor& t_wim = ps[3];
        for (std::size_t idx = 0; idx < freqs.size(); ++idx) {
            const std::size_t f = freqs[idx];
            const std::size_t mirror = f == 0 ? 0 : n - f;
            const bool self_paired = (f == mirror);
            for (std::size_t j = 0; j < c; ++j) {
                const double a = t_wre.data()[idx * c + j];
                const double b = self_paired ? 0.0 : t_wim.data()[idx * c + j];
                const std::size_t bins[2] = {f, mirror};
                const double signs[2] = {1.0, -1.0};
                const std::size_t n_bins = self_paired ? 1 : 2;
                for (std::size_t q = 0; q < n_bins; ++q) {
                    const std::size_t k = bins[q];
                    const double s = signs[q];
                    const double gv = g[k * c + j];
                    if (gv == 0.0) continue;
                    const double xr = t_re.data()[k * c + j];
                    const double xi = t_im.data()[k * c + j];
                    if (from_real) {
                        // out_re[k] = a*xr - s*b*xi
                        if (t_re.requires_grad()) t_re.grad()[k * c + j] += gv * a;
                        if (t_im.requires_grad()) t_im.grad()[k * c + j] -= gv * s * b;
                        if (t_wre.requires_grad()) t_wre.grad()[idx * c + j] += gv * xr;
                        if (!self_paired && t_wim.requires_grad()) {
                            t_wim.grad()[idx * c + j] -= gv * s * xi;
                        }
                    } else {
                        // out_im[k] = a*xi + s*b*xr
                        if (t_re.requires_grad()) t_re.grad()[k * c + j] += gv * s * b;
                        if (t_im.requires_grad()) t_im.grad()[k * c + j] += gv * a;
                        if (t_wre.requires_grad()) t_wre.grad()[idx * c + j] += gv * xi;
                        if (!self_paired && t_wim.requires_grad()) {
                            t_wim.grad()[idx * c + j] += gv * s * xr;
                        }
                    }
                }
            }
        }
    };
    attach(out.re, {re, im, w_re, w_im},
           [accumulate](const Tensor& o) { accumulate(o, true); });
    attach(out.im, {re, im, w_re, w_im},
           [accumulate](const Tensor& o) { accumulate(o, false); });
    return out;
}

Tensor mode_mask(std::size_t length, std::size_t channels,
                 const std::vector<std::size_t>& freqs) {
    std::vector<double> v(length * channels, 0.0);
    for (std::size_t f : freqs) {
        if (f > length / 2) {
            throw std::invalid_argument("mode_mask: frequency index out of range");
        }
        const std::size_t mirror = f == 0 ? 0 : length - f;
        for (std::size_t j = 0; j < channels; ++j) {
            v[f * channels + j] = 1.0;
            v[mirror * channels + j] = 1.0;
        }
    }
    return Tensor({length, channels}, std::move(v), false);
}

} // namespace freqcast
