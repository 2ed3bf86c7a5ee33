#include "drljrm/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drljrm/util.hpp"

namespace drljrm {

namespace {

double apply_act(Act a, double z) {
    switch (a) {
        case Act::kIdentity: return z;
        case Act::kRelu: return z > 0.0 ? z : 0.0;
        case Act::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

// Derivative expressed through the activation output.
double act_deriv(Act a, double y) {
    switch (a) {
        case Act::kIdentity: return 1.0;
        case Act::kRelu: return y > 0.0 ? 1.0 : 0.0;
        case Act::kSigmoid: return y * (1.0 - y);
    }
    return 1.0;
}

void check_finite(const std::vector<double>& v, const char* where) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::runtime_error(std::string("non-finite value in ") + where);
}

const char* act_name(Act a) {
    switch (a) {
        case Act::kIdentity: return "identity";
        case Act::kRelu: return "relu";
        case Act::kSigmoid: return "sigmoid";
    }
    return "?";
}

}  // namespace

Layer Layer::fc(int n_in, int n_out, Act act) {
    Layer l;
    l.kind = Kind::kFc;
    l.n_in = n_in;
    l.n_out = n_out;
    l.act = act;
    return l;
}

Layer Layer::grouped_fc(std::vector<int> group_in, int group_out, Act act) {
    Layer l;
    l.kind = Kind::kGroupedFc;
    l.group_in = std::move(group_in);
    l.group_out = group_out;
    l.act = act;
    return l;
}

Layer Layer::resblock(int width) {
    Layer l;
    l.kind = Kind::kResBlock;
    l.width = width;
    return l;
}

Layer Layer::conv(int in_c, int out_c, int kernel, Act act) {
    Layer l;
    l.kind = Kind::kConv;
    l.in_c = in_c;
    l.out_c = out_c;
    l.kernel = kernel;
    l.act = act;
    return l;
}

Layer Layer::maxpool(int window) {
    Layer l;
    l.kind = Kind::kMaxPool;
    l.window = window;
    return l;
}

Layer Layer::flatten() {
    Layer l;
    l.kind = Kind::kFlatten;
    return l;
}

size_t Layer::param_count() const {
    switch (kind) {
        case Kind::kFc: return static_cast<size_t>(n_out) * n_in + n_out;
        case Kind::kGroupedFc: {
            size_t n = 0;
            for (int g : group_in) n += static_cast<size_t>(group_out) * g + group_out;
            return n;
        }
        case Kind::kResBlock: return 2 * (static_cast<size_t>(width) * width + width);
        case Kind::kConv: return static_cast<size_t>(out_c) * in_c * kernel * kernel + out_c;
        case Kind::kMaxPool:
        case Kind::kFlatten: return 0;
    }
    return 0;
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw std::invalid_argument("spec: no layers");
    TensorShape s = input;
    if (s.len() <= 0) throw std::invalid_argument("spec: empty input");
    for (size_t li = 0; li < layers.size(); ++li) {
        const Layer& l = layers[li];
        const std::string at = "layer " + std::to_string(li);
        switch (l.kind) {
            case Layer::Kind::kFc:
                if (l.n_in != s.len()) throw std::invalid_argument(at + ": fc n_in mismatch");
                if (l.n_out < 1) throw std::invalid_argument(at + ": fc n_out < 1");
                s = {1, 1, l.n_out};
                break;
            case Layer::Kind::kGroupedFc: {
                int total = 0;
                for (int g : l.group_in) {
                    if (g < 1) throw std::invalid_argument(at + ": empty group");
                    total += g;
                }
                if (total != s.len()) throw std::invalid_argument(at + ": group widths do not cover input");
                if (l.group_out < 1) throw std::invalid_argument(at + ": group_out < 1");
                s = {1, 1, static_cast<int>(l.group_in.size()) * l.group_out};
                break;
            }
            case Layer::Kind::kResBlock:
                if (l.width != s.len()) throw std::invalid_argument(at + ": resblock width mismatch");
                break;
            case Layer::Kind::kConv:
                if (l.in_c != s.c) throw std::invalid_argument(at + ": conv in_c mismatch");
                if (s.h < l.kernel || s.w < l.kernel) throw std::invalid_argument(at + ": conv kernel exceeds map");
                s = {l.out_c, s.h - l.kernel + 1, s.w - l.kernel + 1};
                break;
            case Layer::Kind::kMaxPool:
                if (l.window < 1 || s.h % l.window != 0 || s.w % l.window != 0)
                    throw std::invalid_argument(at + ": pool window must divide the map exactly");
                s = {s.c, s.h / l.window, s.w / l.window};
                break;
            case Layer::Kind::kFlatten:
                s = {1, 1, s.len()};
                break;
        }
    }
}

TensorShape NetworkSpec::shape_after(int layer_idx) const {
    TensorShape s = input;
    for (int li = 0; li <= layer_idx; ++li) {
        const Layer& l = layers[li];
        switch (l.kind) {
            case Layer::Kind::kFc: s = {1, 1, l.n_out}; break;
            case Layer::Kind::kGroupedFc: s = {1, 1, static_cast<int>(l.group_in.size()) * l.group_out}; break;
            case Layer::Kind::kResBlock: break;
            case Layer::Kind::kConv: s = {l.out_c, s.h - l.kernel + 1, s.w - l.kernel + 1}; break;
            case Layer::Kind::kMaxPool: s = {s.c, s.h / l.window, s.w / l.window}; break;
            case Layer::Kind::kFlatten: s = {1, 1, s.len()}; break;
        }
    }
    return s;
}

TensorShape NetworkSpec::output_shape() const { return shape_after(static_cast<int>(layers.size()) - 1); }

size_t NetworkSpec::param_count() const {
    size_t n = 0;
    for (const Layer& l : layers) n += l.param_count();
    return n;
}

uint64_t NetworkSpec::count_macs() const {
    uint64_t macs = 0;
    TensorShape s = input;
    for (const Layer& l : layers) {
        switch (l.kind) {
            case Layer::Kind::kFc:
                macs += static_cast<uint64_t>(l.n_in) * l.n_out;
                s = {1, 1, l.n_out};
                break;
            case Layer::Kind::kGroupedFc:
                for (int g : l.group_in) macs += static_cast<uint64_t>(g) * l.group_out;
                s = {1, 1, static_cast<int>(l.group_in.size()) * l.group_out};
                break;
            case Layer::Kind::kResBlock:
                macs += 2ull * l.width * l.width;
                break;
            case Layer::Kind::kConv: {
                const int oh = s.h - l.kernel + 1, ow = s.w - l.kernel + 1;
                macs += static_cast<uint64_t>(oh) * ow * l.kernel * l.kernel * l.in_c * l.out_c;
                s = {l.out_c, oh, ow};
                break;
            }
            case Layer::Kind::kMaxPool:
                s = {s.c, s.h / l.window, s.w / l.window};
                break;
            case Layer::Kind::kFlatten:
                s = {1, 1, s.len()};
                break;
        }
    }
    return macs;
}

std::string NetworkSpec::describe() const {
    std::ostringstream out;
    out << "input " << input.c << 'x' << input.h << 'x' << input.w;
    for (const Layer& l : layers) {
        switch (l.kind) {
            case Layer::Kind::kFc: out << "; fc " << l.n_in << "->" << l.n_out << ' ' << act_name(l.act); break;
            case Layer::Kind::kGroupedFc:
                out << "; grouped_fc [";
                for (size_t i = 0; i < l.group_in.size(); ++i) out << (i ? "," : "") << l.group_in[i];
                out << "]->" << l.group_out << ' ' << act_name(l.act);
                break;
            case Layer::Kind::kResBlock: out << "; resblock " << l.width; break;
            case Layer::Kind::kConv:
                out << "; conv " << l.in_c << "->" << l.out_c << " k" << l.kernel << ' ' << act_name(l.act);
                break;
            case Layer::Kind::kMaxPool: out << "; maxpool " << l.window; break;
            case Layer::Kind::kFlatten: out << "; flatten"; break;
        }
    }
    return out.str();
}

uint64_t NetworkSpec::hash() const {
    uint64_t h = 14695981039346656037ull;
    for (char c : describe()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    offsets_.resize(spec_.layers.size());
    size_t off = 0;
    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        offsets_[li] = off;
        off += spec_.layers[li].param_count();
    }
    params_ = Tensor(static_cast<int>(off));
}

void Network::init(Rng& rng) {
    auto glorot = [&rng](double* w, int fan_in, int fan_out, int count) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < count; ++i) w[i] = rng.uniform(-a, a);
    };
    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        const Layer& l = spec_.layers[li];
        double* p = params_.data.data() + offsets_[li];
        switch (l.kind) {
            case Layer::Kind::kFc:
                glorot(p, l.n_in, l.n_out, l.n_in * l.n_out);
                // biases (trailing n_out entries) stay zero
                break;
            case Layer::Kind::kGroupedFc: {
                size_t off = 0;
                for (int g : l.group_in) {
                    glorot(p + off, g, l.group_out, g * l.group_out);
                    off += static_cast<size_t>(g) * l.group_out + l.group_out;
                }
                break;
            }
            case Layer::Kind::kResBlock: {
                const size_t wn = static_cast<size_t>(l.width) * l.width;
                glorot(p, l.width, l.width, static_cast<int>(wn));
                glorot(p + wn + l.width, l.width, l.width, static_cast<int>(wn));
                break;
            }
            case Layer::Kind::kConv:
                glorot(p, l.in_c * l.kernel * l.kernel, l.out_c * l.kernel * l.kernel,
                       l.out_c * l.in_c * l.kernel * l.kernel);
                break;
            case Layer::Kind::kMaxPool:
            case Layer::Kind::kFlatten: break;
        }
    }
}

namespace {

// Shared layer-forward used by both forward() overloads.
void layer_forward(const Layer& l, const TensorShape& in_shape, const double* p, const std::vector<double>& x,
                   std::vector<double>& y, std::vector<double>* aux) {
    switch (l.kind) {
        case Layer::Kind::kFc: {
            y.assign(l.n_out, 0.0);
            const double* b = p + static_cast<size_t>(l.n_in) * l.n_out;
            for (int o = 0; o < l.n_out; ++o) {
                const double* w = p + static_cast<size_t>(o) * l.n_in;
                double z = b[o];
                for (int i = 0; i < l.n_in; ++i) z += w[i] * x[i];
                y[o] = apply_act(l.act, z);
            }
            break;
        }
        case Layer::Kind::kGroupedFc: {
            y.assign(l.group_in.size() * l.group_out, 0.0);
            size_t poff = 0;
            int xoff = 0, yoff = 0;
            for (int g : l.group_in) {
                const double* w = p + poff;
                const double* b = w + static_cast<size_t>(g) * l.group_out;
                for (int o = 0; o < l.group_out; ++o) {
                    double z = b[o];
                    const double* wo = w + static_cast<size_t>(o) * g;
                    for (int i = 0; i < g; ++i) z += wo[i] * x[xoff + i];
                    y[yoff + o] = apply_act(l.act, z);
                }
                poff += static_cast<size_t>(g) * l.group_out + l.group_out;
                xoff += g;
                yoff += l.group_out;
            }
            break;
        }
        case Layer::Kind::kResBlock: {
            const int n = l.width;
            const size_t wn = static_cast<size_t>(n) * n;
            const double* w1 = p;
            const double* b1 = p + wn;
            const double* w2 = b1 + n;
            const double* b2 = w2 + wn;
            std::vector<double> u(n);
            for (int o = 0; o < n; ++o) {
                double z = b1[o];
                const double* wo = w1 + static_cast<size_t>(o) * n;
                for (int i = 0; i < n; ++i) z += wo[i] * x[i];
                u[o] = z > 0.0 ? z : 0.0;
            }
            y.assign(n, 0.0);
            for (int o = 0; o < n; ++o) {
                double z = b2[o];
                const double* wo = w2 + static_cast<size_t>(o) * n;
                for (int i = 0; i < n; ++i) z += wo[i] * u[i];
                z += x[o];  // skip connection
                y[o] = z > 0.0 ? z : 0.0;
            }
            if (aux) *aux = std::move(u);
            break;
        }
        case Layer::Kind::kConv: {
            const int H = in_shape.h, W = in_shape.w, K = l.kernel;
            const int OH = H - K + 1, OW = W - K + 1;
            y.assign(static_cast<size_t>(l.out_c) * OH * OW, 0.0);
            const double* bias = p + static_cast<size_t>(l.out_c) * l.in_c * K * K;
            for (int oc = 0; oc < l.out_c; ++oc) {
                for (int oy = 0; oy < OH; ++oy) {
                    for (int ox = 0; ox < OW; ++ox) {
                        double z = bias[oc];
                        for (int ic = 0; ic < l.in_c; ++ic) {
                            const double* w = p + ((static_cast<size_t>(oc) * l.in_c + ic) * K) * K;
                            const double* xc = x.data() + static_cast<size_t>(ic) * H * W;
                            for (int ky = 0; ky < K; ++ky)
                                for (int kx = 0; kx < K; ++kx)
                                    z += w[ky * K + kx] * xc[(oy + ky) * W + (ox + kx)];
                        }
                        y[(static_cast<size_t>(oc) * OH + oy) * OW + ox] = apply_act(l.act, z);
                    }
                }
            }
            break;
        }
        case Layer::Kind::kMaxPool: {
            const int H = in_shape.h, W = in_shape.w, C = in_shape.c, P = l.window;
            const int OH = H / P, OW = W / P;
            y.assign(static_cast<size_t>(C) * OH * OW, 0.0);
            for (int c = 0; c < C; ++c) {
                const double* xc = x.data() + static_cast<size_t>(c) * H * W;
                for (int oy = 0; oy < OH; ++oy) {
                    for (int ox = 0; ox < OW; ++ox) {
                        double best = xc[(oy * P) * W + ox * P];
                        for (int dy = 0; dy < P; ++dy)
                            for (int dx = 0; dx < P; ++dx)
                                best = std::max(best, xc[(oy * P + dy) * W + (ox * P + dx)]);
                        y[(static_cast<size_t>(c) * OH + oy) * OW + ox] = best;
                    }
                }
            }
            break;
        }
        case Layer::Kind::kFlatten:
            y = x;
            break;
    }
}

}  // namespace

std::vector<double> Network::forward(const std::vector<double>& input) const {
    ForwardCache scratch;
    return forward(input, scratch);
}

std::vector<double> Network::forward(const std::vector<double>& input, ForwardCache& cache) const {
    if (static_cast<int>(input.size()) != spec_.input.len())
        throw std::invalid_argument("forward: input length mismatch");
    const size_t L = spec_.layers.size();
    cache.x.assign(L + 1, {});
    cache.aux.assign(L, {});
    cache.x[0] = input;
    TensorShape s = spec_.input;
    for (size_t li = 0; li < L; ++li) {
        const Layer& l = spec_.layers[li];
        layer_forward(l, s, params_.data.data() + offsets_[li], cache.x[li], cache.x[li + 1], &cache.aux[li]);
        check_finite(cache.x[li + 1], "layer output");
        s = spec_.shape_after(static_cast<int>(li));
    }
    forward_macs_ += spec_.count_macs();
    return cache.x[L];
}

std::vector<double> Network::backward(const ForwardCache& cache, const std::vector<double>& upstream) {
    const size_t L = spec_.layers.size();
    if (cache.x.size() != L + 1) throw std::invalid_argument("backward: cache not populated");
    if (upstream.size() != cache.x[L].size()) throw std::invalid_argument("backward: upstream length mismatch");

    std::vector<double> g = upstream;  // dL/d(output of current layer)
    for (int li = static_cast<int>(L) - 1; li >= 0; --li) {
        const Layer& l = spec_.layers[li];
        const std::vector<double>& x = cache.x[li];
        const std::vector<double>& y = cache.x[li + 1];
        const TensorShape in_shape = li == 0 ? spec_.input : spec_.shape_after(li - 1);
        double* p = params_.data.data() + offsets_[li];
        double* pg = params_.grad.data() + offsets_[li];
        std::vector<double> gx(x.size(), 0.0);

        switch (l.kind) {
            case Layer::Kind::kFc: {
                double* bg = pg + static_cast<size_t>(l.n_in) * l.n_out;
                for (int o = 0; o < l.n_out; ++o) {
                    const double dz = g[o] * act_deriv(l.act, y[o]);
                    const double* w = p + static_cast<size_t>(o) * l.n_in;
                    double* wg = pg + static_cast<size_t>(o) * l.n_in;
                    bg[o] += dz;
                    for (int i = 0; i < l.n_in; ++i) {
                        wg[i] += dz * x[i];
                        gx[i] += dz * w[i];
                    }
                }
                break;
            }
            case Layer::Kind::kGroupedFc: {
                size_t poff = 0;
                int xoff = 0, yoff = 0;
                for (int gsz : l.group_in) {
                    const double* w = p + poff;
                    double* wg = pg + poff;
                    double* bg = wg + static_cast<size_t>(gsz) * l.group_out;
                    for (int o = 0; o < l.group_out; ++o) {
                        const double dz = g[yoff + o] * act_deriv(l.act, y[yoff + o]);
                        const double* wo = w + static_cast<size_t>(o) * gsz;
                        double* wgo = wg + static_cast<size_t>(o) * gsz;
                        bg[o] += dz;
                        for (int i = 0; i < gsz; ++i) {
                            wgo[i] += dz * x[xoff + i];
                            gx[xoff + i] += dz * wo[i];
                        }
                    }
                    poff += static_cast<size_t>(gsz) * l.group_out + l.group_out;
                    xoff += gsz;
                    yoff += l.group_out;
                }
                break;
            }
            case Layer::Kind::kResBlock: {
                const int n = l.width;
                const size_t wn = static_cast<size_t>(n) * n;
                const double* w1 = p;
                const double* w2 = p + wn + n;
                double* w1g = pg;
                double* b1g = pg + wn;
                double* w2g = pg + wn + n;
                double* b2g = w2g + wn;
                const std::vector<double>& u = cache.aux[li];
                // y = relu(x + fc2(u)); gate the upstream, then split into the
                // skip path and the fc2 path.
                std::vector<double> gs(n), gu(n, 0.0);
                for (int o = 0; o < n; ++o) gs[o] = y[o] > 0.0 ? g[o] : 0.0;
                for (int o = 0; o < n; ++o) {
                    const double dz = gs[o];
                    const double* wo = w2 + static_cast<size_t>(o) * n;
                    double* wgo = w2g + static_cast<size_t>(o) * n;
                    b2g[o] += dz;
                    for (int i = 0; i < n; ++i) {
                        wgo[i] += dz * u[i];
                        gu[i] += dz * wo[i];
                    }
                }
                for (int o = 0; o < n; ++o) {
                    const double dz = u[o] > 0.0 ? gu[o] : 0.0;
                    const double* wo = w1 + static_cast<size_t>(o) * n;
                    double* wgo = w1g + static_cast<size_t>(o) * n;
                    b1g[o] += dz;
                    for (int i = 0; i < n; ++i) {
                        wgo[i] += dz * x[i];
                        gx[i] += dz * wo[i];
                    }
                }
                for (int o = 0; o < n; ++o) gx[o] += gs[o];  // skip branch
                break;
            }
            case Layer::Kind::kConv: {
                const int H = in_shape.h, W = in_shape.w, K = l.kernel;
                const int OH = H - K + 1, OW = W - K + 1;
                double* bias_g = pg + static_cast<size_t>(l.out_c) * l.in_c * K * K;
                for (int oc = 0; oc < l.out_c; ++oc) {
                    for (int oy = 0; oy < OH; ++oy) {
                        for (int ox = 0; ox < OW; ++ox) {
                            const size_t oidx = (static_cast<size_t>(oc) * OH + oy) * OW + ox;
                            const double dz = g[oidx] * act_deriv(l.act, y[oidx]);
                            if (dz == 0.0) continue;
                            bias_g[oc] += dz;
                            for (int ic = 0; ic < l.in_c; ++ic) {
                                const size_t wbase = ((static_cast<size_t>(oc) * l.in_c + ic) * K) * K;
                                const double* xc = x.data() + static_cast<size_t>(ic) * H * W;
                                double* gxc = gx.data() + static_cast<size_t>(ic) * H * W;
                                for (int ky = 0; ky < K; ++ky) {
                                    for (int kx = 0; kx < K; ++kx) {
                                        pg[wbase + ky * K + kx] += dz * xc[(oy + ky) * W + (ox + kx)];
                                        gxc[(oy + ky) * W + (ox + kx)] += dz * p[wbase + ky * K + kx];
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case Layer::Kind::kMaxPool: {
                const int H = in_shape.h, W = in_shape.w, C = in_shape.c, P = l.window;
                const int OH = H / P, OW = W / P;
                for (int c = 0; c < C; ++c) {
                    const double* xc = x.data() + static_cast<size_t>(c) * H * W;
                    double* gxc = gx.data() + static_cast<size_t>(c) * H * W;
                    for (int oy = 0; oy < OH; ++oy) {
                        for (int ox = 0; ox < OW; ++ox) {
                            // First maximum in row-major window order receives
                            // the gradient, matching forward's tie behavior.
                            int by = oy * P, bx = ox * P;
                            double best = xc[by * W + bx];
                            for (int dy = 0; dy < P; ++dy) {
                                for (int dx = 0; dx < P; ++dx) {
                                    const double v = xc[(oy * P + dy) * W + (ox * P + dx)];
                                    if (v > best) {
                                        best = v;
                                        by = oy * P + dy;
                                        bx = ox * P + dx;
                                    }
                                }
                            }
                            gxc[by * W + bx] += g[(static_cast<size_t>(c) * OH + oy) * OW + ox];
                        }
                    }
                }
                break;
            }
            case Layer::Kind::kFlatten:
                gx = g;
                break;
        }
        check_finite(gx, "layer gradient");
        g = std::move(gx);
    }
    backward_macs_ += 2 * spec_.count_macs();
    return g;
}

void RmsProp::step(Tensor& params) {
    if (acc.empty()) acc.assign(params.size(), 0.0);
    if (acc.size() != params.size()) throw std::invalid_argument("rmsprop: accumulator size mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        const double grad = params.grad[i];
        acc[i] = rho * acc[i] + (1.0 - rho) * grad * grad;
        params.data[i] -= lr * grad / std::sqrt(acc[i] + eps);
    }
}

void soft_update(Tensor& target, const Tensor& online, double tau) {
    if (target.size() != online.size()) throw std::invalid_argument("soft_update: size mismatch");
    for (size_t i = 0; i < target.size(); ++i)
        target.data[i] = tau * online.data[i] + (1.0 - tau) * target.data[i];
}

double gradient_check(Network& net, uint64_t seed, int probes) {
    Rng rng(seed);
    net.init(rng);
    const int n_in = net.spec().input.len();
    const int n_out = net.spec().output_len();
    std::vector<double> input(n_in);
    for (double& v : input) v = rng.uniform(-1.0, 1.0);
    std::vector<double> readout(n_out);
    for (double& c : readout) c = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    net.params().zero_grad();
    net.forward(input, cache);
    std::vector<double> input_grad = net.backward(cache, readout);

    auto loss_at = [&](const std::vector<double>& in) {
        const std::vector<double> out = net.forward(in);
        double s = 0.0;
        for (int i = 0; i < n_out; ++i) s += readout[i] * out[i];
        return s;
    };

    const double step = 1e-5;
    auto rel_err = [](double analytic, double numeric) {
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
        return std::fabs(analytic - numeric) / denom;
    };

    // Probe either all coordinates or a seeded subset for large nets.
    const size_t n_params = net.params().size();
    std::vector<size_t> param_idx;
    if (probes <= 0 || static_cast<size_t>(probes) >= n_params) {
        param_idx.resize(n_params);
        for (size_t i = 0; i < n_params; ++i) param_idx[i] = i;
    } else {
        for (int t = 0; t < probes; ++t) param_idx.push_back(static_cast<size_t>(rng.below(n_params)));
    }

    double worst = 0.0;
    for (size_t i : param_idx) {
        const double keep = net.params().data[i];
        net.params().data[i] = keep + step;
        const double lp = loss_at(input);
        net.params().data[i] = keep - step;
        const double lm = loss_at(input);
        net.params().data[i] = keep;
        worst = std::max(worst, rel_err(net.params().grad[i], (lp - lm) / (2.0 * step)));
    }
    for (int i = 0; i < n_in; ++i) {
        const double keep = input[i];
        input[i] = keep + step;
        const double lp = loss_at(input);
        input[i] = keep - step;
        const double lm = loss_at(input);
        input[i] = keep;
        worst = std::max(worst, rel_err(input_grad[i], (lp - lm) / (2.0 * step)));
    }
    return worst;
}

void save_checkpoint(const std::string& path, const std::vector<CheckpointBlock>& blocks) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for write: " + path);
    out << "drljrm-checkpoint 1\n";
    for (const auto& b : blocks) {
        out << "block " << b.name << ' ' << b.hash << ' ' << b.values.size() << '\n';
        for (double v : b.values) out << fmt_double(v) << '\n';
    }
}

std::vector<CheckpointBlock> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "drljrm-checkpoint" || version != 1)
        throw std::invalid_argument("not a checkpoint file: " + path);
    std::vector<CheckpointBlock> blocks;
    std::string tag;
    while (in >> tag) {
        if (tag != "block") throw std::invalid_argument("checkpoint: malformed block header");
        CheckpointBlock b;
        size_t n = 0;
        in >> b.name >> b.hash >> n;
        b.values.resize(n);
        for (size_t i = 0; i < n; ++i)
            if (!(in >> b.values[i])) throw std::invalid_argument("checkpoint: truncated block " + b.name);
        blocks.push_back(std::move(b));
    }
    return blocks;
}

const CheckpointBlock& checkpoint_block(const std::vector<CheckpointBlock>& blocks, const std::string& name,
                                        uint64_t expected_hash) {
    for (const auto& b : blocks) {
        if (b.name != name) continue;
        if (b.hash != expected_hash)
            throw std::invalid_argument("checkpoint block '" + name + "' was saved for a different network spec");
        return b;
    }
    throw std::invalid_argument("checkpoint block '" + name + "' missing");
}

}  // namespace drljrm
