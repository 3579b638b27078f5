#include "hoig/prototype_bank.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "hoig/amplifier.hpp"
#include "hoig/errors.hpp"

namespace hoig::bank {

namespace {

constexpr char kMagic[4] = {'H', 'P', 'P', 'B'};
constexpr std::uint32_t kVersion = 1;

void require_initialized(const BankLayer& layer, const std::string& op) {
    if (!layer.initialized) {
        throw ConfigError(op + ": bank layer is uninitialized; run the K-Means "
                          "warm-start path and bootstrap it first");
    }
}

void require_batch(const BatchCentroids& batch, const BankLayer& layer,
                   const std::string& op) {
    if (batch.batch_size() == 0) throw ConfigError(op + ": empty batch");
    for (const Matrix& c : batch.centroids)
        require_shape(op, "sample centroids", layer.k(), layer.dim(), c.rows(), c.cols());
}

/// w*a + (1-w)*b elementwise; the w = 0 and w = 1 boundaries short-circuit
/// so they are bit-exact.
Matrix mix(const Matrix& a, const Matrix& b, double w) {
    if (w == 0.0) return b;
    if (w == 1.0) return a;
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i)
        out.data()[i] = w * a.data()[i] + (1.0 - w) * b.data()[i];
    return out;
}

/// Plain mean of the per-sample global centroids and weight-averaged class
/// centroids; shared by soft and slot alignment.
struct BatchMeans {
    Matrix global;
    Matrix positive;
    Matrix negative;
};

BatchMeans batch_means(const BatchCentroids& batch, std::size_t k, std::size_t d,
                       double epsilon) {
    const std::size_t b_count = batch.batch_size();
    BatchMeans m{Matrix(k, d), Matrix(k, d), Matrix(k, d)};
    for (const Matrix& c : batch.centroids)
        for (std::size_t i = 0; i < k * d; ++i) m.global.data()[i] += c.data()[i];
    for (double& v : m.global.data()) v /= static_cast<double>(b_count);

    for (std::size_t kk = 0; kk < k; ++kk) {
        double pos_sum = 0.0, neg_sum = 0.0;
        for (std::size_t b = 0; b < b_count; ++b) {
            pos_sum += batch.pos_weights(b, kk);
            neg_sum += batch.neg_weights(b, kk);
            for (std::size_t t = 0; t < d; ++t) {
                m.positive(kk, t) += batch.pos_weights(b, kk) * batch.positive[b](kk, t);
                m.negative(kk, t) += batch.neg_weights(b, kk) * batch.negative[b](kk, t);
            }
        }
        for (std::size_t t = 0; t < d; ++t) {
            m.positive(kk, t) /= pos_sum + epsilon;
            m.negative(kk, t) /= neg_sum + epsilon;
        }
    }
    return m;
}

}  // namespace

PrototypeBank make_bank(std::size_t layer_count, std::size_t k, std::size_t dim,
                        std::uint64_t seed, double mu, double gamma,
                        ScheduleState schedule) {
    if (layer_count == 0 || k == 0 || dim == 0) {
        throw ConfigError("make_bank: layer_count, K and D must all be positive");
    }
    PrototypeBank bank;
    bank.ema_momentum = mu;
    bank.global_mix = gamma;
    bank.schedule = schedule;
    bank.layers.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
        BankLayer layer;
        layer.positive = Matrix(k, dim);
        layer.negative = Matrix(k, dim);
        layer.global = Matrix(k, dim);
        layer.attention = amp::AttentionWeights::seeded(dim, derive_seed(seed, l)).w;
        bank.layers.push_back(std::move(layer));
    }
    return bank;
}

GateResult gate(std::span<const Matrix> batch_features, const BankLayer& layer, double tau) {
    require_initialized(layer, "gate");
    if (batch_features.empty()) throw ConfigError("gate: empty batch");
    const std::size_t d = layer.dim();
    std::vector<double> grand_mean(d, 0.0);
    std::size_t node_count = 0;
    for (const Matrix& x : batch_features) {
        if (x.cols() != d) {
            throw ShapeError("gate: features expected " + std::to_string(d) +
                             " columns, got " + std::to_string(x.cols()));
        }
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t t = 0; t < d; ++t) grand_mean[t] += x(i, t);
        node_count += x.rows();
    }
    for (double& v : grand_mean) v /= static_cast<double>(node_count);

    std::vector<double> proto_mean = colwise_mean(layer.global);
    GateResult res;
    res.similarity = cosine(grand_mean, proto_mean);
    res.pass = res.similarity >= tau;
    return res;
}

Matrix select_init_centroids(const BankLayer& layer, int k,
                             std::optional<TrainCounts> counts, Rng& rng,
                             double perturb_sigma) {
    require_initialized(layer, "select_init_centroids");
    if (k < 1 || static_cast<std::size_t>(k) != layer.k()) {
        throw ConfigError("select_init_centroids: requested K=" + std::to_string(k) +
                          " does not match bank K=" + std::to_string(layer.k()));
    }
    const std::size_t kk = layer.k(), d = layer.dim();
    Matrix out(kk, d);

    if (!counts) {
        out = layer.global;
    } else {
        if (counts->pos_count + counts->neg_count <= 0) {
            throw ConfigError("select_init_centroids: batch has no labeled samples");
        }
        const auto global_slots =
            static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(kk)));
        const std::size_t remaining = kk - global_slots;
        const double total = counts->pos_count + counts->neg_count;
        auto n_pos = static_cast<std::size_t>(
            std::llround(static_cast<double>(remaining) * counts->pos_count / total));
        auto n_neg = static_cast<std::size_t>(
            std::llround(static_cast<double>(remaining) * counts->neg_count / total));
        // Rounding both halves can miss the target by one; the majority class absorbs it.
        while (n_pos + n_neg < remaining)
            (counts->pos_count >= counts->neg_count ? n_pos : n_neg) += 1;
        while (n_pos + n_neg > remaining)
            (counts->pos_count >= counts->neg_count ? n_pos : n_neg) -= 1;

        std::size_t row = 0;
        for (std::size_t g = 0; g < global_slots; ++g, ++row)
            for (std::size_t t = 0; t < d; ++t) out(row, t) = layer.global(g, t);
        for (std::size_t p = 0; p < n_pos; ++p, ++row) {
            std::size_t src = rng.index(kk);
            for (std::size_t t = 0; t < d; ++t) out(row, t) = layer.positive(src, t);
        }
        for (std::size_t q = 0; q < n_neg; ++q, ++row) {
            std::size_t src = rng.index(kk);
            for (std::size_t t = 0; t < d; ++t) out(row, t) = layer.negative(src, t);
        }
    }

    if (perturb_sigma > 0.0) {
        for (double& v : out.data()) v += rng.normal() * perturb_sigma;
    }
    return out;
}

LabelCentroids label_aware_centroids(const Matrix& x, const Matrix& u, int label,
                                     double fuzzifier, double epsilon) {
    if (label != 0 && label != 1) {
        throw ConfigError("label_aware_centroids: label must be 0 or 1, got " +
                          std::to_string(label));
    }
    if (u.rows() != x.rows()) {
        throw ShapeError("label_aware_centroids: membership expected " +
                         shape_string(x.rows(), u.cols()) + ", got " +
                         shape_string(u.rows(), u.cols()));
    }
    const std::size_t n = x.rows(), d = x.cols(), k = u.cols();
    LabelCentroids out{Matrix(k, d), Matrix(k, d), std::vector<double>(k, 0.0),
                       std::vector<double>(k, 0.0)};
    for (std::size_t kk = 0; kk < k; ++kk) {
        double pos_sum = 0.0, neg_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // w^+ = (y u)^m and w^- = ((1-y) u)^m: one side is identically zero.
            double w = std::pow(u(i, kk), fuzzifier);
            double wp = label == 1 ? w : 0.0;
            double wn = label == 0 ? w : 0.0;
            pos_sum += wp;
            neg_sum += wn;
            for (std::size_t t = 0; t < d; ++t) {
                out.positive(kk, t) += wp * x(i, t);
                out.negative(kk, t) += wn * x(i, t);
            }
        }
        out.pos_weights[kk] = pos_sum;
        out.neg_weights[kk] = neg_sum;
        for (std::size_t t = 0; t < d; ++t) {
            out.positive(kk, t) /= pos_sum + epsilon;
            out.negative(kk, t) /= neg_sum + epsilon;
        }
    }
    return out;
}

std::vector<std::size_t> greedy_match(const Matrix& similarity) {
    if (similarity.rows() != similarity.cols()) {
        throw ShapeError("greedy_match: similarity must be square, got " +
                         shape_string(similarity.rows(), similarity.cols()));
    }
    const std::size_t k = similarity.rows();
    std::vector<std::size_t> pi(k, 0);
    std::vector<bool> row_used(k, false), col_used(k, false);
    for (std::size_t step = 0; step < k; ++step) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (row_used[i]) continue;
            for (std::size_t j = 0; j < k; ++j) {
                if (col_used[j]) continue;
                if (similarity(i, j) > best) {
                    best = similarity(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        pi[bi] = bj;
        row_used[bi] = true;
        col_used[bj] = true;
    }
    return pi;
}

AlignedCentroids soft_align(const BatchCentroids& batch, const BankLayer& layer,
                            double epsilon) {
    require_initialized(layer, "soft_align");
    require_batch(batch, layer, "soft_align");
    const std::size_t k = layer.k(), d = layer.dim();
    BatchMeans means = batch_means(batch, k, d, epsilon);

    Matrix sim(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            sim(i, j) = cosine(layer.global.row(i), means.global.row(j));
    std::vector<std::size_t> pi = greedy_match(sim);

    AlignedCentroids out{Matrix(k, d), Matrix(k, d), Matrix(k, d)};
    for (std::size_t kk = 0; kk < k; ++kk) {
        for (std::size_t t = 0; t < d; ++t) {
            out.global(kk, t) = means.global(pi[kk], t);
            out.positive(kk, t) = means.positive(pi[kk], t);
            out.negative(kk, t) = means.negative(pi[kk], t);
        }
    }
    return out;
}

AlignedCentroids slot_align(const BatchCentroids& batch, const BankLayer& layer,
                            double epsilon) {
    require_initialized(layer, "slot_align");
    require_batch(batch, layer, "slot_align");
    const std::size_t k = layer.k(), d = layer.dim(), b_count = batch.batch_size();
    BatchMeans means = batch_means(batch, k, d, epsilon);

    Matrix slotted_g(k, d), slotted_p(k, d), slotted_n(k, d);
    std::vector<double> denom(k, 0.0), cos_row(k);
    for (std::size_t b = 0; b < b_count; ++b) {
        for (std::size_t m = 0; m < k; ++m) {
            for (std::size_t kk = 0; kk < k; ++kk)
                cos_row[kk] = cosine(batch.centroids[b].row(m), layer.global.row(kk));
            std::vector<double> a = softmax(cos_row);
            for (std::size_t kk = 0; kk < k; ++kk) {
                denom[kk] += a[kk];
                for (std::size_t t = 0; t < d; ++t) {
                    slotted_g(kk, t) += a[kk] * batch.centroids[b](m, t);
                    slotted_p(kk, t) += a[kk] * batch.positive[b](m, t);
                    slotted_n(kk, t) += a[kk] * batch.negative[b](m, t);
                }
            }
        }
    }

    AlignedCentroids out{Matrix(k, d), Matrix(k, d), Matrix(k, d)};
    for (std::size_t kk = 0; kk < k; ++kk) {
        for (std::size_t t = 0; t < d; ++t) {
            out.global(kk, t) = 0.5 * (slotted_g(kk, t) / denom[kk] + means.global(kk, t));
            out.positive(kk, t) = 0.5 * (slotted_p(kk, t) / denom[kk] + means.positive(kk, t));
            out.negative(kk, t) = 0.5 * (slotted_n(kk, t) / denom[kk] + means.negative(kk, t));
        }
    }
    return out;
}

void ema_update(BankLayer& layer, const AlignedCentroids& aligned, double mu, double gamma) {
    require_initialized(layer, "ema_update");
    require_shape("ema_update", "aligned centroids", layer.k(), layer.dim(),
                  aligned.global.rows(), aligned.global.cols());
    layer.positive = mix(aligned.positive, layer.positive, mu);
    layer.negative = mix(aligned.negative, layer.negative, mu);
    // Class-neutral prototype from the updated class banks.
    Matrix neutral(layer.k(), layer.dim());
    for (std::size_t i = 0; i < neutral.data().size(); ++i)
        neutral.data()[i] = 0.5 * (layer.positive.data()[i] + layer.negative.data()[i]);
    layer.global = mix(mix(aligned.global, neutral, gamma), layer.global, mu);
}

PhaseConfig schedule(const ScheduleState& state, int epoch, bool training) {
    if (epoch < 0) throw ConfigError("schedule: epoch must be >= 0");
    PhaseConfig pc;
    pc.alignment = epoch < state.alignment_switch_epoch ? Alignment::Soft : Alignment::Slot;
    if (!training) {
        pc.init_source = InitSource::Prototype;
        pc.tau = -std::numeric_limits<double>::infinity();
        pc.prototypes_frozen = true;
        return pc;
    }
    pc.prototypes_frozen = false;
    if (epoch < state.warm_start_epoch) {
        pc.init_source = InitSource::KMeans;
        pc.tau = -std::numeric_limits<double>::infinity();
        return pc;
    }
    pc.init_source = InitSource::Prototype;
    const int span = state.total_epochs - state.warm_start_epoch;
    if (span <= 0) {
        pc.tau = 0.0;
    } else {
        double frac = static_cast<double>(epoch - state.warm_start_epoch) /
                      static_cast<double>(span);
        pc.tau = std::max(0.0, state.tau_start * (1.0 - frac));
    }
    return pc;
}

void bootstrap(BankLayer& layer, const BatchCentroids& batch) {
    if (layer.initialized) throw ConfigError("bootstrap: bank layer already initialized");
    if (batch.batch_size() == 0) throw ConfigError("bootstrap: empty batch");
    for (const Matrix& c : batch.centroids)
        require_shape("bootstrap", "sample centroids", layer.k(), layer.dim(), c.rows(),
                      c.cols());
    Matrix mean(layer.k(), layer.dim());
    for (const Matrix& c : batch.centroids)
        for (std::size_t i = 0; i < mean.data().size(); ++i) mean.data()[i] += c.data()[i];
    for (double& v : mean.data()) v /= static_cast<double>(batch.batch_size());
    layer.positive = mean;
    layer.negative = mean;
    layer.global = mean;
    layer.initialized = true;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xff);
    b[1] = static_cast<char>((v >> 8) & 0xff);
    b[2] = static_cast<char>((v >> 16) & 0xff);
    b[3] = static_cast<char>((v >> 24) & 0xff);
    out.append(b, 4);
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 4;
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

void put_matrix(std::string& out, const Matrix& m) {
    for (double v : m.data()) put_f32(out, static_cast<float>(v));
}

Matrix read_matrix(Reader& r, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = static_cast<double>(r.f32());
    return m;
}

}  // namespace

void save(const PrototypeBank& bank, const std::string& path) {
    if (bank.layers.empty()) throw ConfigError("save: bank has no layers");
    const std::size_t k = bank.layers.front().k(), d = bank.layers.front().dim();
    for (const BankLayer& layer : bank.layers) {
        if (layer.k() != k || layer.dim() != d || layer.attention.size() != d) {
            throw ConfigError("save: all bank layers must share K and D");
        }
    }
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(k));
    put_u32(out, static_cast<std::uint32_t>(d));
    put_u32(out, static_cast<std::uint32_t>(bank.layers.size()));
    for (const BankLayer& layer : bank.layers) {
        put_matrix(out, layer.positive);
        put_matrix(out, layer.negative);
        put_matrix(out, layer.global);
        for (double v : layer.attention) put_f32(out, static_cast<float>(v));
    }
    put_f32(out, static_cast<float>(bank.ema_momentum));
    put_f32(out, static_cast<float>(bank.global_mix));
    put_u32(out, static_cast<std::uint32_t>(bank.schedule.current_epoch));
    put_u32(out, static_cast<std::uint32_t>(bank.schedule.warm_start_epoch));
    put_u32(out, static_cast<std::uint32_t>(bank.schedule.alignment_switch_epoch));
    put_u32(out, static_cast<std::uint32_t>(bank.schedule.total_epochs));
    put_f32(out, static_cast<float>(bank.schedule.tau_start));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("save: cannot open " + path + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw DataError("save: write failed for " + path);
}

PrototypeBank load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("load: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (buf.size() < 20) {
        throw DataError("load: truncated bank file: expected at least 20 header bytes, got " +
                        std::to_string(buf.size()));
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw DataError("load: bad magic in " + path + " (expected HPPB)");
    }
    Reader r{buf, 4};
    std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw DataError("load: unsupported bank version " + std::to_string(version) +
                        " (expected " + std::to_string(kVersion) + ")");
    }
    const std::size_t k = r.u32(), d = r.u32(), layer_count = r.u32();
    if (k == 0 || d == 0 || layer_count == 0) {
        throw DataError("load: bank header has zero K, D, or layer count");
    }
    const std::size_t expected = 20 + layer_count * (3 * k * d + d) * 4 + 8 + 16 + 4;
    if (buf.size() != expected) {
        throw DataError("load: bank file truncated or padded: expected " +
                        std::to_string(expected) + " bytes, got " +
                        std::to_string(buf.size()));
    }

    PrototypeBank bank;
    bank.layers.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
        BankLayer layer;
        layer.positive = read_matrix(r, k, d);
        layer.negative = read_matrix(r, k, d);
        layer.global = read_matrix(r, k, d);
        layer.attention.resize(d);
        for (double& v : layer.attention) v = static_cast<double>(r.f32());
        layer.initialized = true;
        bank.layers.push_back(std::move(layer));
    }
    bank.ema_momentum = static_cast<double>(r.f32());
    bank.global_mix = static_cast<double>(r.f32());
    bank.schedule.current_epoch = static_cast<int>(r.u32());
    bank.schedule.warm_start_epoch = static_cast<int>(r.u32());
    bank.schedule.alignment_switch_epoch = static_cast<int>(r.u32());
    bank.schedule.total_epochs = static_cast<int>(r.u32());
    bank.schedule.tau_start = static_cast<double>(r.f32());
    return bank;
}

}  // namespace hoig::bank
