#include "hoig/feature_io.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "hoig/errors.hpp"

namespace hoig::io {

namespace {

constexpr char kMagic[4] = {'H', 'P', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xff);
    b[1] = static_cast<char>((v >> 8) & 0xff);
    b[2] = static_cast<char>((v >> 16) & 0xff);
    b[3] = static_cast<char>((v >> 24) & 0xff);
    out.append(b, 4);
}

std::uint32_t get_u32(const std::string& buf, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(file)),
                       std::istreambuf_iterator<char>());
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void write_features(const FeatureSet& fs, const std::string& path) {
    if (fs.samples.empty()) throw ConfigError("write_features: no samples");
    const std::size_t n = fs.n_nodes(), d = fs.dim();
    for (const Matrix& m : fs.samples)
        require_shape("write_features", "sample", n, d, m.rows(), m.cols());

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(fs.sample_count()));
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(d));
    for (const Matrix& m : fs.samples) {
        for (double v : m.data()) {
            auto f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(out, bits);
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("write_features: cannot open " + path + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw DataError("write_features: write failed for " + path);
}

FeatureSet read_features(const std::string& path) {
    std::string buf = read_file(path);
    if (buf.size() < 20) {
        throw DataError("feature file " + path + ": expected at least 20 header bytes, got " +
                        std::to_string(buf.size()));
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw DataError("feature file " + path + ": bad magic (expected HPFM)");
    }
    std::uint32_t version = get_u32(buf, 4);
    if (version != kVersion) {
        throw DataError("feature file " + path + ": unsupported version " +
                        std::to_string(version));
    }
    const std::uint64_t b = get_u32(buf, 8), n = get_u32(buf, 12), d = get_u32(buf, 16);
    if (b == 0 || n == 0 || d == 0) {
        throw DataError("feature file " + path + ": zero sample, node, or dim count");
    }
    const std::uint64_t expected = 20 + 4 * b * n * d;
    if (buf.size() != expected) {
        throw DataError("feature file " + path + ": expected " + std::to_string(expected) +
                        " bytes, got " + std::to_string(buf.size()));
    }

    FeatureSet fs;
    fs.samples.reserve(b);
    std::size_t pos = 20;
    for (std::uint64_t s = 0; s < b; ++s) {
        Matrix m(n, d);
        for (double& v : m.data()) {
            std::uint32_t bits = get_u32(buf, pos);
            float f;
            std::memcpy(&f, &bits, 4);
            v = static_cast<double>(f);
            pos += 4;
        }
        fs.samples.push_back(std::move(m));
    }
    return fs;
}

FeatureSet read_features_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(file, line)) throw DataError("csv " + path + ": empty file");
    if (trim(line).rfind("node,", 0) != 0) {
        throw DataError("csv " + path + ": header must start with 'node,dim0,...'");
    }

    FeatureSet fs;
    std::vector<std::vector<double>> current;
    auto flush = [&] {
        if (current.empty()) return;
        Matrix m(current.size(), current.front().size());
        for (std::size_t i = 0; i < current.size(); ++i)
            for (std::size_t j = 0; j < current[i].size(); ++j) m(i, j) = current[i][j];
        fs.samples.push_back(std::move(m));
        current.clear();
    };

    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        long node = -1;
        bool first = true;
        while (std::getline(row, cell, ',')) {
            try {
                if (first) {
                    node = std::stol(trim(cell));
                    first = false;
                } else {
                    values.push_back(std::stod(trim(cell)));
                }
            } catch (const std::exception&) {
                throw DataError("csv " + path + ": line " + std::to_string(line_no) +
                                ": cannot parse '" + cell + "'");
            }
        }
        if (node == 0) flush();  // node 0 opens the next sample
        if (node != static_cast<long>(current.size())) {
            throw DataError("csv " + path + ": line " + std::to_string(line_no) +
                            ": expected node index " + std::to_string(current.size()) +
                            ", got " + std::to_string(node));
        }
        if (!current.empty() && values.size() != current.front().size()) {
            throw DataError("csv " + path + ": line " + std::to_string(line_no) +
                            ": dim count changed within a sample");
        }
        if (values.empty()) {
            throw DataError("csv " + path + ": line " + std::to_string(line_no) +
                            ": no feature values");
        }
        current.push_back(std::move(values));
    }
    flush();
    if (fs.samples.empty()) throw DataError("csv " + path + ": no data rows");
    const std::size_t n = fs.n_nodes(), d = fs.dim();
    for (const Matrix& m : fs.samples) {
        if (m.rows() != n || m.cols() != d) {
            throw DataError("csv " + path + ": samples disagree on N or D");
        }
    }
    return fs;
}

std::vector<int> read_labels(const std::string& path, std::size_t sample_count) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open " + path);
    std::vector<int> labels(sample_count, -1);
    std::set<long> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream row(line);
        long index = -1;
        int value = -1;
        if (!(row >> index >> value)) {
            throw DataError("label file " + path + ": line " + std::to_string(line_no) +
                            ": expected '<sample_index> <0|1>'");
        }
        if (value != 0 && value != 1) {
            throw DataError("label file " + path + ": line " + std::to_string(line_no) +
                            ": label must be 0 or 1, got " + std::to_string(value));
        }
        if (index < 0 || static_cast<std::size_t>(index) >= sample_count) {
            throw ConfigError("label file " + path + ": sample index " +
                              std::to_string(index) + " out of range for " +
                              std::to_string(sample_count) + " samples");
        }
        if (!seen.insert(index).second) {
            throw DataError("label file " + path + ": duplicate sample index " +
                            std::to_string(index));
        }
        labels[static_cast<std::size_t>(index)] = value;
    }
    for (std::size_t i = 0; i < sample_count; ++i) {
        if (labels[i] < 0) {
            throw ConfigError("label file " + path + ": missing label for sample " +
                              std::to_string(i));
        }
    }
    return labels;
}

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("run config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "k") cfg.layer.k = std::stoi(value);
            else if (key == "degree_cap") {
                int cap = std::stoi(value);
                cfg.layer.degree_cap = cap == 0 ? std::nullopt : std::optional<int>(cap);
            }
            else if (key == "beta1") cfg.layer.beta1 = std::stod(value);
            else if (key == "beta2") cfg.layer.beta2 = std::stod(value);
            else if (key == "fuzzifier") cfg.layer.fcm.fuzzifier = std::stod(value);
            else if (key == "max_iters") cfg.layer.fcm.max_iters = std::stoi(value);
            else if (key == "epsilon") cfg.layer.fcm.epsilon = std::stod(value);
            else if (key == "convergence_tol") cfg.layer.fcm.convergence_tol = std::stod(value);
            else if (key == "kmeans_iters") cfg.layer.kmeans_iters = std::stoi(value);
            else if (key == "perturb_sigma") cfg.layer.perturb_sigma = std::stod(value);
            else if (key == "layer_id") cfg.layer.layer_id = std::stoi(value);
            else if (key == "mu") cfg.mu = std::stod(value);
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "tau_start") cfg.schedule.tau_start = std::stod(value);
            else if (key == "warm_start_epoch") cfg.schedule.warm_start_epoch = std::stoi(value);
            else if (key == "alignment_switch_epoch")
                cfg.schedule.alignment_switch_epoch = std::stoi(value);
            else if (key == "total_epochs") cfg.schedule.total_epochs = std::stoi(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
            else {
                throw ConfigError("run config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("run config line " + std::to_string(line_no) +
                              ": cannot parse value '" + value + "' for key '" + key + "'");
        }
    }
    if (cfg.batch_size < 1) throw ConfigError("run config: batch_size must be >= 1");
    if (cfg.schedule.warm_start_epoch > cfg.schedule.alignment_switch_epoch ||
        cfg.schedule.alignment_switch_epoch > cfg.schedule.total_epochs) {
        throw ConfigError("run config: epochs must satisfy warm_start <= alignment_switch "
                          "<= total");
    }
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open run config " + path);
    std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    return parse_run_config_text(text);
}

}  // namespace hoig::io
