#include "antgen/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace antgen {

namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;
using Vec = Eigen::VectorXf;
using MapV = Eigen::Map<Vec>;
using CMapV = Eigen::Map<const Vec>;

// Tensor slots: per conv stage (weights, bias), then the score head
// (W1, b1, W2, b2), then the optional response head in the same layout.
std::size_t conv_w(std::size_t s) { return 2 * s; }
std::size_t conv_b(std::size_t s) { return 2 * s + 1; }

struct HeadSlots {
    std::size_t w1, b1, w2, b2;
};

HeadSlots score_slots(const NetworkShape& s)
{
    const std::size_t base = 2 * s.conv_channels.size();
    return {base, base + 1, base + 2, base + 3};
}

HeadSlots response_slots(const NetworkShape& s)
{
    const std::size_t base = 2 * s.conv_channels.size() + 4;
    return {base, base + 1, base + 2, base + 3};
}

void im2col(const float* in, int channels, int h, int w, MatR& col)
{
    col.resize(channels * 9, static_cast<Eigen::Index>(h) * w);
    for (int c = 0; c < channels; ++c) {
        const float* src = in + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                float* dst = col.row(c * 9 + ky * 3 + kx).data();
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - 1;
                    float* d = dst + static_cast<std::size_t>(y) * w;
                    if (sy < 0 || sy >= h) {
                        std::fill(d, d + w, 0.0f);
                        continue;
                    }
                    const float* s = src + static_cast<std::size_t>(sy) * w;
                    for (int x = 0; x < w; ++x) {
                        const int sx = x + kx - 1;
                        d[x] = (sx >= 0 && sx < w) ? s[sx] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im(const MatR& col, int channels, int h, int w, float* out)
{
    std::fill(out, out + static_cast<std::size_t>(channels) * h * w, 0.0f);
    for (int c = 0; c < channels; ++c) {
        float* dst = out + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const float* src = col.row(c * 9 + ky * 3 + kx).data();
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h)
                        continue;
                    const float* s = src + static_cast<std::size_t>(y) * w;
                    float* d = dst + static_cast<std::size_t>(sy) * w;
                    for (int x = 0; x < w; ++x) {
                        const int sx = x + kx - 1;
                        if (sx >= 0 && sx < w)
                            d[sx] += s[x];
                    }
                }
            }
        }
    }
}

struct StageCache {
    int h = 0, w = 0;  // input size of the stage
    MatR col;
    MatR act;  // post-ReLU, channels x (h*w)
    std::vector<int> argmax;
};

struct HeadCache {
    Vec z1, a1, mask;
    Vec out;
};

struct Forward {
    std::vector<StageCache> stages;
    Vec features;
    HeadCache score;
    HeadCache response;
};

class Network {
public:
    explicit Network(const NetworkParams& p) : p_(p) {}

    /// Runs the network. With `rng` set, dropout is active (training mode).
    void forward(const GeometryImage& img, Forward& f, Rng* rng, double dropout, bool want_response) const
    {
        const auto& shape = p_.shape;
        if (img.height_px != shape.in_height || img.width_px != shape.in_width)
            throw Error("image is " + std::to_string(img.width_px) + "x" + std::to_string(img.height_px) +
                        " but the network expects " + std::to_string(shape.in_width) + "x" +
                        std::to_string(shape.in_height));
        f.stages.resize(shape.conv_channels.size());
        std::vector<float> x(img.data.begin(), img.data.end());
        int cin = 3, h = shape.in_height, w = shape.in_width;
        for (std::size_t s = 0; s < shape.conv_channels.size(); ++s) {
            const int cout = shape.conv_channels[s];
            StageCache& sc = f.stages[s];
            sc.h = h;
            sc.w = w;
            im2col(x.data(), cin, h, w, sc.col);
            CMapR weights(p_.tensors[conv_w(s)].data(), cout, cin * 9);
            CMapV bias(p_.tensors[conv_b(s)].data(), cout);
            sc.act.noalias() = weights * sc.col;
            sc.act.colwise() += bias;
            sc.act = sc.act.cwiseMax(0.0f);
            const int ph = h / 2, pw = w / 2;
            x.assign(static_cast<std::size_t>(cout) * ph * pw, 0.0f);
            sc.argmax.assign(x.size(), 0);
            for (int c = 0; c < cout; ++c) {
                const float* a = sc.act.row(c).data();
                for (int oy = 0; oy < ph; ++oy) {
                    for (int ox = 0; ox < pw; ++ox) {
                        int best = (2 * oy) * w + 2 * ox;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const int idx = (2 * oy + dy) * w + 2 * ox + dx;
                                if (a[idx] > a[best])
                                    best = idx;
                            }
                        const std::size_t o = (static_cast<std::size_t>(c) * ph + oy) * pw + ox;
                        x[o] = a[best];
                        sc.argmax[o] = best;
                    }
                }
            }
            cin = cout;
            h = ph;
            w = pw;
        }
        f.features = CMapV(x.data(), static_cast<Eigen::Index>(x.size()));
        head_forward(score_slots(shape), 1, f.features, f.score, rng, dropout);
        if (want_response && shape.response_size > 0)
            head_forward(response_slots(shape), shape.response_size, f.features, f.response, rng, dropout);
    }

    /// Accumulates gradients for d(loss)/d(score output) and d(loss)/d(response output).
    void backward(const Forward& f, float d_score, const Vec* d_response,
                  std::vector<std::vector<float>>& grads) const
    {
        const auto& shape = p_.shape;
        Vec d_features = Vec::Zero(f.features.size());
        Vec ds(1);
        ds[0] = d_score;
        head_backward(score_slots(shape), f.features, f.score, ds, grads, d_features);
        if (d_response && shape.response_size > 0)
            head_backward(response_slots(shape), f.features, f.response, *d_response, grads, d_features);

        std::vector<float> d_out(d_features.data(), d_features.data() + d_features.size());
        for (std::size_t si = shape.conv_channels.size(); si-- > 0;) {
            const StageCache& sc = f.stages[si];
            const int cout = shape.conv_channels[si];
            const int cin = si == 0 ? 3 : shape.conv_channels[si - 1];
            const int ph = sc.h / 2, pw = sc.w / 2;
            MatR d_act = MatR::Zero(cout, static_cast<Eigen::Index>(sc.h) * sc.w);
            for (int c = 0; c < cout; ++c) {
                float* da = d_act.row(c).data();
                const float* a = sc.act.row(c).data();
                for (int o = 0; o < ph * pw; ++o) {
                    const std::size_t k = static_cast<std::size_t>(c) * ph * pw + o;
                    const int src = sc.argmax[k];
                    if (a[src] > 0.0f)
                        da[src] += d_out[k];
                }
            }
            MapR gw(grads[conv_w(si)].data(), cout, cin * 9);
            MapV gb(grads[conv_b(si)].data(), cout);
            gw.noalias() += d_act * sc.col.transpose();
            gb += d_act.rowwise().sum();
            if (si == 0)
                break;
            CMapR weights(p_.tensors[conv_w(si)].data(), cout, cin * 9);
            MatR d_col = weights.transpose() * d_act;
            d_out.assign(static_cast<std::size_t>(cin) * sc.h * sc.w, 0.0f);
            col2im(d_col, cin, sc.h, sc.w, d_out.data());
        }
    }

private:
    void head_forward(const HeadSlots& slots, int out_size, const Vec& in, HeadCache& hc, Rng* rng,
                      double dropout) const
    {
        const int hidden = p_.shape.hidden;
        const auto feat = static_cast<Eigen::Index>(in.size());
        CMapR w1(p_.tensors[slots.w1].data(), hidden, feat);
        CMapV b1(p_.tensors[slots.b1].data(), hidden);
        CMapR w2(p_.tensors[slots.w2].data(), out_size, hidden);
        CMapV b2(p_.tensors[slots.b2].data(), out_size);
        hc.z1 = w1 * in + b1;
        hc.a1 = hc.z1.cwiseMax(0.0f);
        hc.mask = Vec::Ones(hidden);
        if (rng && dropout > 0.0) {
            const float keep = static_cast<float>(1.0 - dropout);
            for (int i = 0; i < hidden; ++i)
                hc.mask[i] = rng->uniform() < dropout ? 0.0f : 1.0f / keep;
            hc.a1 = hc.a1.cwiseProduct(hc.mask);
        }
        hc.out = w2 * hc.a1 + b2;
    }

    void head_backward(const HeadSlots& slots, const Vec& in, const HeadCache& hc, const Vec& d_out,
                       std::vector<std::vector<float>>& grads, Vec& d_in) const
    {
        const int hidden = p_.shape.hidden;
        const auto feat = static_cast<Eigen::Index>(in.size());
        const auto out_size = static_cast<Eigen::Index>(d_out.size());
        CMapR w1(p_.tensors[slots.w1].data(), hidden, feat);
        CMapR w2(p_.tensors[slots.w2].data(), out_size, hidden);
        MapR g1(grads[slots.w1].data(), hidden, feat);
        MapV gb1(grads[slots.b1].data(), hidden);
        MapR g2(grads[slots.w2].data(), out_size, hidden);
        MapV gb2(grads[slots.b2].data(), out_size);
        g2.noalias() += d_out * hc.a1.transpose();
        gb2 += d_out;
        Vec da = w2.transpose() * d_out;
        da = da.cwiseProduct(hc.mask);
        for (int i = 0; i < hidden; ++i)
            if (!(hc.z1[i] > 0.0f))
                da[i] = 0.0f;
        g1.noalias() += da * in.transpose();
        gb1 += da;
        d_in.noalias() += w1.transpose() * da;
    }

    const NetworkParams& p_;
};

double normal(Rng& rng)
{
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<float> he_init(std::size_t count, int fan_in, Rng& rng)
{
    std::vector<float> t(count);
    const double sd = std::sqrt(2.0 / fan_in);
    for (auto& v : t)
        v = static_cast<float>(sd * normal(rng));
    return t;
}

NetworkShape shape_for(const TrainConfig& cfg, const GeometryPlane& plane, int response_size)
{
    NetworkShape s;
    s.in_height = plane.height_px;
    s.in_width = plane.width_px;
    s.conv_channels = cfg.conv_channels;
    s.hidden = cfg.hidden;
    s.response_size = response_size;
    return s;
}

struct Adam {
    std::vector<std::vector<float>> m, v;
    long step = 0;

    explicit Adam(const NetworkParams& p)
    {
        for (const auto& t : p.tensors) {
            m.emplace_back(t.size(), 0.0f);
            v.emplace_back(t.size(), 0.0f);
        }
    }

    void apply(NetworkParams& p, const std::vector<std::vector<float>>& grads, double lr, double weight_decay)
    {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++step;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (std::size_t t = 0; t < p.tensors.size(); ++t) {
            // Even slots are weights; biases are not decayed.
            const bool decay = (t % 2 == 0);
            auto& w = p.tensors[t];
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double g = grads[t][i];
                m[t][i] = static_cast<float>(b1 * m[t][i] + (1 - b1) * g);
                v[t][i] = static_cast<float>(b2 * v[t][i] + (1 - b2) * g * g);
                const double mh = m[t][i] / c1;
                const double vh = v[t][i] / c2;
                double upd = mh / (std::sqrt(vh) + eps);
                if (decay)
                    upd += weight_decay * w[i];
                w[i] = static_cast<float>(w[i] - lr * upd);
            }
        }
    }
};

double raw_prediction(const ClassifierState& state, const Forward& f)
{
    return static_cast<double>(f.score.out[0]) * state.label_scale + state.label_mean;
}

}  // namespace

// ---------------------------------------------------------------------------

int NetworkShape::feature_size() const
{
    int h = in_height, w = in_width;
    for (std::size_t i = 0; i < conv_channels.size(); ++i) {
        h /= 2;
        w /= 2;
    }
    if (h < 1 || w < 1)
        throw Error("image of " + std::to_string(in_width) + "x" + std::to_string(in_height) +
                    " is too small for " + std::to_string(conv_channels.size()) + " pooling stages");
    return (conv_channels.empty() ? 3 : conv_channels.back()) * h * w;
}

std::size_t NetworkParams::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& t : tensors)
        n += t.size();
    return n;
}

NetworkParams init_network(const NetworkShape& shape, std::uint64_t seed)
{
    if (shape.conv_channels.empty() || shape.hidden < 1)
        throw Error("network needs at least one convolution stage and one hidden unit");
    Rng rng(derive_seed(seed, "classifier/init"));
    NetworkParams p;
    p.shape = shape;
    int cin = 3;
    for (int cout : shape.conv_channels) {
        p.tensors.push_back(he_init(static_cast<std::size_t>(cout) * cin * 9, cin * 9, rng));
        p.tensors.emplace_back(static_cast<std::size_t>(cout), 0.0f);
        cin = cout;
    }
    const int feat = shape.feature_size();
    auto add_head = [&](int out) {
        p.tensors.push_back(he_init(static_cast<std::size_t>(shape.hidden) * feat, feat, rng));
        p.tensors.emplace_back(static_cast<std::size_t>(shape.hidden), 0.0f);
        p.tensors.push_back(he_init(static_cast<std::size_t>(out) * shape.hidden, shape.hidden, rng));
        p.tensors.emplace_back(static_cast<std::size_t>(out), 0.0f);
    };
    add_head(1);
    if (shape.response_size > 0)
        add_head(shape.response_size);
    return p;
}

ClassifierState train(std::span<const DatasetRecord> records, const TrainConfig& cfg)
{
    if (records.size() < std::max<std::size_t>(cfg.min_records, 2))
        throw Error("training needs at least " + std::to_string(cfg.min_records) + " records, got " +
                    std::to_string(records.size()));
    if (cfg.batch_size < 1 || cfg.max_epochs < 1)
        throw Error("batch size and epoch count must be positive");

    // Validation split by id hash, independent of record order.
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ha = fnv1a64(records[a].id), hb = fnv1a64(records[b].id);
        return ha != hb ? ha < hb : records[a].id < records[b].id;
    });
    std::size_t n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * records.size()));
    n_val = std::clamp<std::size_t>(n_val, 1, records.size() - 1);
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
    std::vector<std::size_t> tr(order.begin() + static_cast<long>(n_val), order.end());
    std::sort(tr.begin(), tr.end());

    const auto& first = records[order.front()];
    const int response_size = cfg.response_head ? static_cast<int>(first.response.size()) : 0;
    for (const auto& r : records) {
        if (r.image.width_px != first.image.width_px || r.image.height_px != first.image.height_px)
            throw Error("training images have inconsistent shapes");
        if (cfg.response_head && static_cast<int>(r.response.size()) != response_size)
            throw Error("training responses have inconsistent grids");
    }

    ClassifierState state;
    state.network = init_network(shape_for(cfg, first.image, response_size), cfg.seed);
    state.meta.data_size = records.size();
    state.meta.validation_size = n_val;
    state.meta.iteration = cfg.iteration;

    double mean = 0.0;
    for (auto i : tr)
        mean += records[i].score.value;
    mean /= static_cast<double>(tr.size());
    double var = 0.0;
    for (auto i : tr)
        var += (records[i].score.value - mean) * (records[i].score.value - mean);
    var /= static_cast<double>(tr.size());
    state.label_mean = mean;
    state.label_scale = std::sqrt(var);
    if (!(state.label_scale > 1e-12)) {
        state.label_scale = 1.0;
        state.meta.zero_variance_labels = true;
    }

    std::vector<GeometryImage> images(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        images[i] = records[i].image.to_image();

    Rng rng(derive_seed(cfg.seed, "classifier/train"));
    Adam adam(state.network);
    std::vector<std::vector<float>> grads;
    for (const auto& t : state.network.tensors)
        grads.emplace_back(t.size(), 0.0f);

    auto val_mse = [&](const NetworkParams& params) {
        Network net(params);
        Forward f;
        double sum = 0.0;
        for (auto i : val) {
            net.forward(images[i], f, nullptr, 0.0, false);
            const double e = raw_prediction(state, f) - records[i].score.value;
            sum += e * e;
        }
        return sum / static_cast<double>(val.size());
    };

    double lr = cfg.learning_rate;
    double best_val = val_mse(state.network);
    NetworkParams best = state.network;
    int since_best = 0, since_improve = 0;
    double plateau_ref = best_val;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = tr.size(); i > 1; --i)
            std::swap(tr[i - 1], tr[rng.index(i)]);
        double epoch_loss = 0.0;
        Network net(state.network);
        Forward f;
        for (std::size_t start = 0; start < tr.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(tr.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const float inv_b = 1.0f / static_cast<float>(end - start);
            for (auto& g : grads)
                std::fill(g.begin(), g.end(), 0.0f);
            for (std::size_t k = start; k < end; ++k) {
                const DatasetRecord& r = records[tr[k]];
                net.forward(images[tr[k]], f, &rng, cfg.dropout, response_size > 0);
                const float target = static_cast<float>((r.score.value - state.label_mean) / state.label_scale);
                const float err = f.score.out[0] - target;
                const double raw_err = err * state.label_scale;
                epoch_loss += raw_err * raw_err;
                Vec d_resp;
                if (response_size > 0) {
                    Vec t(response_size);
                    for (int q = 0; q < response_size; ++q)
                        t[q] = static_cast<float>(r.response.s11_db[static_cast<std::size_t>(q)] / state.response_scale);
                    d_resp = (f.response.out - t) *
                             static_cast<float>(2.0 * cfg.response_weight / response_size) * inv_b;
                }
                net.backward(f, 2.0f * err * inv_b, response_size > 0 ? &d_resp : nullptr, grads);
            }
            adam.apply(state.network, grads, lr, cfg.weight_decay);
        }
        const double train_mse = epoch_loss / static_cast<double>(tr.size());
        const double v = val_mse(state.network);
        state.meta.log.push_back({epoch, train_mse, v, lr});
        state.meta.epochs = epoch;

        if (v < best_val) {
            best_val = v;
            best = state.network;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (v < plateau_ref * (1.0 - 1e-4)) {
            plateau_ref = v;
            since_improve = 0;
        } else if (++since_improve >= cfg.plateau_patience) {
            lr = std::max(cfg.min_learning_rate, lr * cfg.plateau_factor);
            since_improve = 0;
            plateau_ref = v;
        }
        if (since_best >= cfg.early_stop_patience)
            break;
    }
    state.network = std::move(best);
    if (state.meta.zero_variance_labels) {
        // Constant labels: make the score head output exactly the label mean.
        const std::size_t out = 2 * state.network.shape.conv_channels.size() + 2;
        std::fill(state.network.tensors[out].begin(), state.network.tensors[out].end(), 0.0f);
        std::fill(state.network.tensors[out + 1].begin(), state.network.tensors[out + 1].end(), 0.0f);
    }
    return state;
}

Score predict_score(const ClassifierState& state, const GeometryImage& img)
{
    Network net(state.network);
    Forward f;
    net.forward(img, f, nullptr, 0.0, false);
    return {raw_prediction(state, f)};
}

std::vector<double> predict_response(const ClassifierState& state, const GeometryImage& img)
{
    if (state.network.shape.response_size == 0)
        throw Error("classifier was trained without a response head");
    Network net(state.network);
    Forward f;
    net.forward(img, f, nullptr, 0.0, true);
    std::vector<double> out(static_cast<std::size_t>(f.response.out.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = f.response.out[static_cast<Eigen::Index>(i)] * state.response_scale;
    return out;
}

bool classify(const ClassifierState& state, const GeometryImage& img)
{
    return classify_score(predict_score(state, img).value, state.threshold);
}

Evaluation evaluate_predictions(std::span<const double> predicted, std::span<const double> actual,
                                double threshold)
{
    if (predicted.size() != actual.size() || predicted.empty())
        throw Error("evaluation needs matching, non-empty prediction and label lists");
    Evaluation e;
    std::size_t tp = 0, fp = 0;
    double sq = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sq += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
        const bool pos = classify_score(predicted[i], threshold);
        if (actual[i] <= threshold) {
            ++e.actual_positive;
            tp += pos;
        } else {
            ++e.actual_negative;
            fp += pos;
        }
    }
    e.mse = sq / static_cast<double>(actual.size());
    if (e.actual_positive > 0)
        e.tp_rate = static_cast<double>(tp) / static_cast<double>(e.actual_positive);
    if (e.actual_negative > 0)
        e.fp_rate = static_cast<double>(fp) / static_cast<double>(e.actual_negative);
    return e;
}

Evaluation evaluate(const ClassifierState& state, std::span<const DatasetRecord> records)
{
    std::vector<double> pred, actual;
    for (const auto& r : records) {
        pred.push_back(predict_score(state, r.image.to_image()).value);
        actual.push_back(r.score.value);
    }
    return evaluate_predictions(pred, actual, state.threshold);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'A', 'N', 'T', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const ClassifierState& state, const std::string& path)
{
    const auto& s = state.network.shape;
    nlohmann::json h{{"in_height", s.in_height},   {"in_width", s.in_width},
                     {"conv_channels", s.conv_channels}, {"hidden", s.hidden},
                     {"response_size", s.response_size}, {"label_mean", state.label_mean},
                     {"label_scale", state.label_scale}, {"response_scale", state.response_scale},
                     {"epochs", state.meta.epochs},  {"data_size", state.meta.data_size},
                     {"validation_size", state.meta.validation_size},
                     {"iteration", state.meta.iteration},
                     {"zero_variance_labels", state.meta.zero_variance_labels}};
    h["threshold"] = std::isinf(state.threshold) && state.threshold > 0 ? nlohmann::json(nullptr)
                                                                         : nlohmann::json(state.threshold);
    h["log"] = nlohmann::json::array();
    for (const auto& e : state.meta.log)
        h["log"].push_back({e.epoch, e.train_mse, e.val_mse, e.learning_rate});
    h["tensor_sizes"] = nlohmann::json::array();
    for (const auto& t : state.network.tensors)
        h["tensor_sizes"].push_back(t.size());
    const std::string header = h.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& t : state.network.tensors)
        out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
}

ClassifierState load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path);
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error(path + ": not a classifier checkpoint");
    if (version != kVersion)
        throw Error(path + ": unsupported checkpoint version " + std::to_string(version));
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    const auto h = nlohmann::json::parse(header);

    ClassifierState state;
    auto& s = state.network.shape;
    s.in_height = h.at("in_height");
    s.in_width = h.at("in_width");
    s.conv_channels = h.at("conv_channels").get<std::vector<int>>();
    s.hidden = h.at("hidden");
    s.response_size = h.at("response_size");
    state.label_mean = h.at("label_mean");
    state.label_scale = h.at("label_scale");
    state.response_scale = h.at("response_scale");
    state.threshold = h.at("threshold").is_null() ? std::numeric_limits<double>::infinity()
                                                  : h.at("threshold").get<double>();
    state.meta.epochs = h.at("epochs");
    state.meta.data_size = h.at("data_size");
    state.meta.validation_size = h.at("validation_size");
    state.meta.iteration = h.at("iteration");
    state.meta.zero_variance_labels = h.at("zero_variance_labels");
    for (const auto& e : h.at("log"))
        state.meta.log.push_back({e[0].get<int>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>()});
    for (const auto& n : h.at("tensor_sizes")) {
        std::vector<float> t(n.get<std::size_t>());
        in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
        state.network.tensors.push_back(std::move(t));
    }
    if (!in)
        throw Error(path + ": truncated parameter data");
    const NetworkParams reference = init_network(s, 0);
    if (reference.tensors.size() != state.network.tensors.size())
        throw Error(path + ": tensor count does not match the declared shape");
    for (std::size_t i = 0; i < reference.tensors.size(); ++i)
        if (reference.tensors[i].size() != state.network.tensors[i].size())
            throw Error(path + ": tensor " + std::to_string(i) + " has the wrong size");
    return state;
}

void write_training_log(const ClassifierState& state, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "epoch,train_mse,val_mse,lr\n";
    for (const auto& e : state.meta.log)
        out << e.epoch << ',' << format_double(e.train_mse) << ',' << format_double(e.val_mse) << ','
            << format_double(e.learning_rate) << '\n';
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw Error("spearman needs two equally sized samples of at least two values");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
                ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0)
        return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace antgen
