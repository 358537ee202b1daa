#include "deeprotor/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deeprotor {

static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[] = "DQNAV1\n";
constexpr size_t kMagicLen = 7;

template <typename I>
void put_int(std::string& out, I v) {
    char buf[sizeof(I)];
    std::memcpy(buf, &v, sizeof(I));
    out.append(buf, sizeof(I));
}

class Reader {
  public:
    Reader(const std::string& bytes, size_t pos) : bytes_(bytes), pos_(pos) {}

    template <typename I>
    I get_int() {
        need(sizeof(I));
        I v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(I));
        pos_ += sizeof(I);
        return v;
    }
    std::string get_bytes(size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void get_floats(float* dst, size_t n) {
        need(n * sizeof(float));
        std::memcpy(dst, bytes_.data() + pos_, n * sizeof(float));
        pos_ += n * sizeof(float);
    }
    size_t pos() const { return pos_; }

  private:
    void need(size_t n) {
        if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint: truncated stream");
    }
    const std::string& bytes_;
    size_t pos_;
};

}  // namespace

const TensorRecord* CheckpointData::find(const std::string& name) const {
    for (const TensorRecord& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

const TensorRecord& CheckpointData::require(const std::string& name) const {
    const TensorRecord* t = find(name);
    if (!t) throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
    return *t;
}

std::string serialize_checkpoint(const CheckpointData& data) {
    std::string out;
    out.append(kMagic, kMagicLen);
    put_int<uint64_t>(out, data.metadata.size());
    out += data.metadata;
    put_int<uint32_t>(out, static_cast<uint32_t>(data.tensors.size()));
    for (const TensorRecord& t : data.tensors) {
        put_int<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
        out += t.name;
        put_int<uint32_t>(out, static_cast<uint32_t>(t.dims.size()));
        size_t count = 1;
        for (int d : t.dims) {
            put_int<uint32_t>(out, static_cast<uint32_t>(d));
            count *= static_cast<size_t>(d);
        }
        if (count != t.data.size()) throw std::logic_error("checkpoint: tensor dims disagree with data");
        const size_t bytes = t.data.size() * sizeof(float);
        const size_t at = out.size();
        out.resize(at + bytes);
        std::memcpy(out.data() + at, t.data.data(), bytes);
    }
    return out;
}

CheckpointData parse_checkpoint(const std::string& bytes) {
    if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
        throw std::runtime_error("checkpoint: bad magic, expected DQNAV1 format");
    Reader r(bytes, kMagicLen);
    CheckpointData data;
    const uint64_t meta_len = r.get_int<uint64_t>();
    data.metadata = r.get_bytes(meta_len);
    const uint32_t n_tensors = r.get_int<uint32_t>();
    data.tensors.reserve(n_tensors);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        TensorRecord t;
        const uint32_t name_len = r.get_int<uint32_t>();
        t.name = r.get_bytes(name_len);
        const uint32_t n_dims = r.get_int<uint32_t>();
        size_t count = 1;
        for (uint32_t d = 0; d < n_dims; ++d) {
            const uint32_t dim = r.get_int<uint32_t>();
            t.dims.push_back(static_cast<int>(dim));
            count *= dim;
        }
        t.data.resize(count);
        r.get_floats(t.data.data(), count);
        data.tensors.push_back(std::move(t));
    }
    return data;
}

void save_checkpoint_file(const std::string& path, const CheckpointData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint file for writing: " + path);
    const std::string bytes = serialize_checkpoint(data);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

CheckpointData load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str());
}

std::vector<float> encode_net_config(const NetConfig& cfg) {
    std::vector<float> enc;
    enc.push_back(static_cast<float>(cfg.input_height));
    enc.push_back(static_cast<float>(cfg.input_width));
    enc.push_back(static_cast<float>(cfg.convs.size()));
    for (const ConvSpec& c : cfg.convs) {
        enc.push_back(static_cast<float>(c.out_channels));
        enc.push_back(static_cast<float>(c.kernel));
        enc.push_back(static_cast<float>(c.stride));
    }
    enc.push_back(static_cast<float>(cfg.hidden.size()));
    for (int h : cfg.hidden) enc.push_back(static_cast<float>(h));
    enc.push_back(static_cast<float>(cfg.outputs));
    return enc;
}

NetConfig decode_net_config(const std::vector<float>& enc) {
    size_t i = 0;
    auto next = [&]() -> int {
        if (i >= enc.size()) throw std::runtime_error("checkpoint: malformed architecture record");
        return static_cast<int>(enc[i++]);
    };
    NetConfig cfg;
    cfg.convs.clear();
    cfg.hidden.clear();
    cfg.input_height = next();
    cfg.input_width = next();
    const int n_convs = next();
    for (int c = 0; c < n_convs; ++c) {
        ConvSpec spec;
        spec.out_channels = next();
        spec.kernel = next();
        spec.stride = next();
        cfg.convs.push_back(spec);
    }
    const int n_hidden = next();
    for (int h = 0; h < n_hidden; ++h) cfg.hidden.push_back(next());
    cfg.outputs = next();
    return cfg;
}

void append_network_records(CheckpointData& data, const std::string& prefix, const QNetwork<float>& net,
                            const AdamState<float>& opt) {
    std::vector<float> arch = encode_net_config(net.config());
    data.tensors.push_back({prefix + "arch", {static_cast<int>(arch.size())}, std::move(arch)});
    for (const TensorInfo& t : net.tensors()) {
        TensorRecord rec;
        rec.name = prefix + t.name;
        rec.dims = t.dims;
        rec.data.assign(net.params().begin() + static_cast<long>(t.offset),
                        net.params().begin() + static_cast<long>(t.offset + t.count));
        data.tensors.push_back(std::move(rec));
    }
    const int n = static_cast<int>(net.param_count());
    data.tensors.push_back({prefix + "opt.m", {n}, opt.m});
    data.tensors.push_back({prefix + "opt.v", {n}, opt.v});
}

void read_network_records(const CheckpointData& data, const std::string& prefix, QNetwork<float>& net,
                          AdamState<float>& opt) {
    for (const TensorInfo& t : net.tensors()) {
        const TensorRecord& rec = data.require(prefix + t.name);
        if (rec.dims != t.dims || rec.data.size() != t.count)
            throw std::runtime_error("checkpoint: tensor '" + rec.name +
                                     "' shape mismatch with current config");
        std::copy(rec.data.begin(), rec.data.end(), net.params().begin() + static_cast<long>(t.offset));
    }
    const TensorRecord& m = data.require(prefix + "opt.m");
    const TensorRecord& v = data.require(prefix + "opt.v");
    if (m.data.size() != net.param_count() || v.data.size() != net.param_count())
        throw std::runtime_error("checkpoint: optimizer state shape mismatch with current config");
    opt.m = m.data;
    opt.v = v.data;
}

std::string save_checkpoint(const QNetwork<float>& net, const AdamState<float>& opt,
                            const std::string& metadata) {
    CheckpointData data;
    char head[256];
    std::snprintf(head, sizeof(head),
                  "opt_step_size %.17g\nopt_beta1 %.17g\nopt_beta2 %.17g\nopt_epsilon %.17g\nopt_t %ld\n---\n",
                  opt.step_size, opt.beta1, opt.beta2, opt.epsilon_hat, opt.step);
    data.metadata = std::string(head) + metadata;
    append_network_records(data, "net.", net, opt);
    return serialize_checkpoint(data);
}

LoadedCheckpoint load_checkpoint(const std::string& bytes) {
    const CheckpointData data = parse_checkpoint(bytes);
    const TensorRecord& arch = data.require("net.arch");
    const NetConfig cfg = decode_net_config(arch.data);
    QNetwork<float> net(cfg);
    AdamState<float> opt(net.param_count());

    const size_t sep = data.metadata.find("---\n");
    std::string user = sep == std::string::npos ? std::string() : data.metadata.substr(sep + 4);
    std::istringstream meta(data.metadata.substr(0, sep));
    std::string line;
    while (std::getline(meta, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "opt_step_size") ls >> opt.step_size;
        else if (key == "opt_beta1") ls >> opt.beta1;
        else if (key == "opt_beta2") ls >> opt.beta2;
        else if (key == "opt_epsilon") ls >> opt.epsilon_hat;
        else if (key == "opt_t") ls >> opt.step;
    }
    read_network_records(data, "net.", net, opt);
    return LoadedCheckpoint{std::move(net), std::move(opt), std::move(user)};
}

}  // namespace deeprotor
