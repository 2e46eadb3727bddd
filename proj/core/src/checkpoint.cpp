#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "codemix/error.hpp"
#include "codemix/net.hpp"

namespace codemix::net {

namespace {

constexpr char kMagic[4] = {'H', 'G', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes, std::size_t len) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= static_cast<unsigned char>(bytes[i]);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// --- little-endian writers -------------------------------------------------

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

// --- reader with bounds checks ---------------------------------------------

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(p[i]);
        }
        return v;
    }

    std::uint64_t u64() {
        const char* p = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(p[i]);
        }
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string str(std::size_t n) { return std::string(take(n), n); }

    std::size_t pos() const { return pos_; }

private:
    const char* take(std::size_t n) {
        if (pos_ + n > limit_) {
            fail("TruncatedFile", "checkpoint ends mid-record");
        }
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    const std::string& bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

void put_tensor(std::string& out, const std::string& name, const Eigen::MatrixXd& t) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put_u32(out, 2);
    put_u64(out, static_cast<std::uint64_t>(t.rows()));
    put_u64(out, static_cast<std::uint64_t>(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
            put_f64(out, t(r, c));
        }
    }
}

void put_tensor(std::string& out, const std::string& name, const Eigen::VectorXd& t) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put_u32(out, 1);
    put_u64(out, static_cast<std::uint64_t>(t.size()));
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        put_f64(out, t(i));
    }
}

void read_tensor_into(ByteReader& in, const std::string& expected_name, Eigen::MatrixXd& t) {
    std::uint32_t name_len = in.u32();
    std::string name = in.str(name_len);
    if (name != expected_name) {
        fail("ShapeMismatch", "expected tensor '" + expected_name + "', found '" + name + "'");
    }
    if (in.u32() != 2) {
        fail("ShapeMismatch", "tensor '" + name + "' must have rank 2");
    }
    std::uint64_t rows = in.u64();
    std::uint64_t cols = in.u64();
    if (rows != static_cast<std::uint64_t>(t.rows()) || cols != static_cast<std::uint64_t>(t.cols())) {
        fail("ShapeMismatch", "tensor '" + name + "' has unexpected shape");
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
            t(r, c) = in.f64();
        }
    }
}

void read_tensor_into(ByteReader& in, const std::string& expected_name, Eigen::VectorXd& t) {
    std::uint32_t name_len = in.u32();
    std::string name = in.str(name_len);
    if (name != expected_name) {
        fail("ShapeMismatch", "expected tensor '" + expected_name + "', found '" + name + "'");
    }
    if (in.u32() != 1) {
        fail("ShapeMismatch", "tensor '" + name + "' must have rank 1");
    }
    std::uint64_t n = in.u64();
    if (n != static_cast<std::uint64_t>(t.size())) {
        fail("ShapeMismatch", "tensor '" + name + "' has unexpected length");
    }
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = in.f64();
    }
}

std::uint32_t count_tensors(const ModelParams& p) {
    std::uint32_t n = 0;
    p.for_each_tensor([&](const char*, const auto&) { ++n; });
    return n;
}

} // namespace

void save_checkpoint(const ModelParams& params, const OptimState& optim, const NetConfig& cfg,
                     const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);

    put_u32(out, static_cast<std::uint32_t>(cfg.hidden));
    put_u32(out, static_cast<std::uint32_t>(cfg.h1));
    put_u32(out, static_cast<std::uint32_t>(cfg.h2));
    put_u32(out, static_cast<std::uint32_t>(cfg.max_seq_len));
    put_f64(out, cfg.dropout_rate);
    put_u8(out, cfg.embeddings_trainable ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(params.dims.input));
    put_u32(out, static_cast<std::uint32_t>(params.dims.classes));
    put_u64(out, params.embedding ? static_cast<std::uint64_t>(params.embedding->rows()) : 0);

    put_f64(out, optim.lr);
    put_f64(out, optim.beta1);
    put_f64(out, optim.beta2);
    put_f64(out, optim.epsilon);
    put_f64(out, optim.l2_lambda);
    put_u64(out, optim.t);

    put_u32(out, count_tensors(params) * 3);
    params.for_each_tensor([&](const char* name, const auto& t) { put_tensor(out, name, t); });
    optim.m.for_each_tensor([&](const char* name, const auto& t) { put_tensor(out, std::string("m.") + name, t); });
    optim.v.for_each_tensor([&](const char* name, const auto& t) { put_tensor(out, std::string("v.") + name, t); });

    put_u64(out, fnv1a64(out, out.size()));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        fail("FileNotFound", "cannot write checkpoint: " + path);
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        fail("FileNotFound", "short write on checkpoint: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        fail("FileNotFound", "cannot open checkpoint: " + path);
    }
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string bytes = buf.str();

    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        fail("BadMagic", path + " is not a checkpoint file");
    }
    if (bytes.size() < sizeof(kMagic) + 4 + 8) {
        fail("TruncatedFile", path + " is too short to be a checkpoint");
    }

    const std::size_t body_end = bytes.size() - 8;
    ByteReader reader(bytes, body_end);
    reader.str(sizeof(kMagic)); // magic, already checked

    std::uint32_t version = reader.u32();
    if (version != kVersion) {
        fail("VersionMismatch",
             path + ": checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kVersion));
    }

    {
        ByteReader tail(bytes, bytes.size());
        tail.str(body_end);
        std::uint64_t stored = tail.u64();
        if (stored != fnv1a64(bytes, body_end)) {
            fail("ChecksumMismatch", path + ": checkpoint checksum does not match");
        }
    }

    Checkpoint ck;
    ck.cfg.hidden = static_cast<int>(reader.u32());
    ck.cfg.h1 = static_cast<int>(reader.u32());
    ck.cfg.h2 = static_cast<int>(reader.u32());
    ck.cfg.max_seq_len = static_cast<int>(reader.u32());
    ck.cfg.dropout_rate = reader.f64();
    ck.cfg.embeddings_trainable = reader.u8() != 0;
    Dims dims;
    dims.input = static_cast<int>(reader.u32());
    dims.classes = static_cast<int>(reader.u32());
    dims.hidden = ck.cfg.hidden;
    dims.h1 = ck.cfg.h1;
    dims.h2 = ck.cfg.h2;
    std::uint64_t vocab_rows = reader.u64();

    ck.optim.lr = reader.f64();
    ck.optim.beta1 = reader.f64();
    ck.optim.beta2 = reader.f64();
    ck.optim.epsilon = reader.f64();
    ck.optim.l2_lambda = reader.f64();
    ck.optim.t = reader.u64();

    const bool with_embedding = ck.cfg.embeddings_trainable;
    ck.params = ModelParams::zeros(dims, with_embedding, static_cast<Eigen::Index>(vocab_rows));
    ck.optim.m = ModelParams::zeros_like(ck.params);
    ck.optim.v = ModelParams::zeros_like(ck.params);

    std::uint32_t tensor_count = reader.u32();
    if (tensor_count != count_tensors(ck.params) * 3) {
        fail("ShapeMismatch", path + ": unexpected tensor count");
    }
    ck.params.for_each_tensor([&](const char* name, auto& t) { read_tensor_into(reader, name, t); });
    ck.optim.m.for_each_tensor(
        [&](const char* name, auto& t) { read_tensor_into(reader, std::string("m.") + name, t); });
    ck.optim.v.for_each_tensor(
        [&](const char* name, auto& t) { read_tensor_into(reader, std::string("v.") + name, t); });

    if (reader.pos() != body_end) {
        fail("MalformedCheckpoint", path + ": unaccounted bytes after tensor records");
    }
    return ck;
}

} // namespace codemix::net
