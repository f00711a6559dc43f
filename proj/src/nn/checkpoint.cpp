#include "uavids/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "uavids/error.hpp"

namespace uavids::nn {

namespace {

constexpr char kMagic[8] = {'U', 'A', 'V', 'I', 'D', 'S', 'C', 'K'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

private:
    void le(std::uint64_t v, int n) {
        for (int k = 0; k < n; ++k) out_.put(static_cast<char>((v >> (8 * k)) & 0xff));
    }
    std::ostream& out_;
};

class Reader {
public:
    Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    void bytes(char* p, std::size_t n) {
        if (!in_.read(p, static_cast<std::streamsize>(n))) fail();
    }
    [[noreturn]] void fail() const { throw DataError("checkpoint '" + source_ + "' is truncated or corrupt"); }

private:
    std::uint64_t le(int n) {
        std::uint64_t v = 0;
        for (int k = 0; k < n; ++k) {
            const int c = in_.get();
            if (c == std::char_traits<char>::eof()) fail();
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * k);
        }
        return v;
    }
    std::istream& in_;
    std::string source_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto& cfg = ckpt.config;
    cfg.validate();
    if (ckpt.codebook.width != cfg.output_width)
        throw ShapeError("checkpoint: label width does not match the output layer");
    if (!ckpt.params.same_shape(NetworkParams::zeros(cfg)))
        throw ShapeError("checkpoint: parameters do not match the model config");

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    Writer w(out);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    for (Index v : {cfg.input_h, cfg.input_w, cfg.filters, cfg.kernel_h, cfg.kernel_w, cfg.pool_h, cfg.pool_w,
                    cfg.lstm_units, cfg.fc_units, cfg.output_width})
        w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(cfg.layout));
    w.f64(cfg.dropout_rate);

    w.u32(static_cast<std::uint32_t>(ckpt.codebook.task));
    w.u32(static_cast<std::uint32_t>(ckpt.codebook.codes.size()));
    for (const auto& code : ckpt.codebook.codes)
        for (int j = 0; j < code.width; ++j) w.u8(static_cast<std::uint8_t>(code.bits[static_cast<std::size_t>(j)]));

    const auto views = ckpt.params.views();
    w.u32(static_cast<std::uint32_t>(views.size()));
    for (const auto& v : views) {
        w.u32(static_cast<std::uint32_t>(v.name.size()));
        w.bytes(v.name.data(), v.name.size());
        w.u64(static_cast<std::uint64_t>(v.rows));
        w.u64(static_cast<std::uint64_t>(v.cols));
        for (double x : v.data) w.f64(x);
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
    Reader r(in, path.string());

    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError("'" + path.string() + "' is not a checkpoint");
    const auto version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError("checkpoint version " + std::to_string(version) + " is not supported");

    Checkpoint ck;
    auto& cfg = ck.config;
    for (Index* field : {&cfg.input_h, &cfg.input_w, &cfg.filters, &cfg.kernel_h, &cfg.kernel_w, &cfg.pool_h,
                         &cfg.pool_w, &cfg.lstm_units, &cfg.fc_units, &cfg.output_width})
        *field = static_cast<Index>(r.u32());
    const auto layout = r.u32();
    if (layout > 1) r.fail();
    cfg.layout = static_cast<ConvLayout>(layout);
    cfg.dropout_rate = r.f64();
    cfg.validate();

    const auto task = r.u32();
    if (task > 2) r.fail();
    ck.codebook.task = static_cast<Task>(task);
    ck.codebook.width = static_cast<int>(cfg.output_width);
    const auto classes = r.u32();
    if (classes > 64 || cfg.output_width > 3) r.fail();
    for (std::uint32_t c = 0; c < classes; ++c) {
        LabelTuple t;
        t.width = ck.codebook.width;
        for (int j = 0; j < t.width; ++j) t.bits[static_cast<std::size_t>(j)] = r.u8();
        ck.codebook.codes.push_back(t);
    }
    // class names follow from the task and class order
    const auto reference = make_codebook(ck.codebook.task, ck.codebook.task == Task::six_class ? ck.codebook.codes
                                                                                                : std::vector<LabelTuple>{},
                                         ck.codebook.task == Task::binary && ck.codebook.width == 2);
    ck.codebook.class_names = reference.class_names;

    ck.params = NetworkParams::zeros(cfg);
    auto views = ck.params.views();
    if (r.u32() != views.size()) r.fail();
    for (auto& v : views) {
        const auto len = r.u32();
        if (len > 256) r.fail();
        std::string name(len, '\0');
        r.bytes(name.data(), len);
        const auto rows = r.u64();
        const auto cols = r.u64();
        if (name != v.name || rows != static_cast<std::uint64_t>(v.rows) || cols != static_cast<std::uint64_t>(v.cols))
            throw ShapeError("checkpoint tensor '" + name + "' does not match the model config");
        for (double& x : v.data) x = r.f64();
    }
    return ck;
}

}  // namespace uavids::nn
