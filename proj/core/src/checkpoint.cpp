#include "pointcat/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace pointcat {

namespace {

constexpr char k_magic[4] = {'P', 'C', 'A', 'T'};
constexpr std::uint8_t k_version = 1;

class byte_writer {
  public:
    explicit byte_writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw parse_error("checkpoint: cannot open '" + path + "' for writing");
    }

    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

    void finish(const std::string& path) {
        out_.flush();
        if (!out_) throw parse_error("checkpoint: write to '" + path + "' failed");
    }

  private:
    std::ofstream out_;
};

class byte_reader {
  public:
    explicit byte_reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw parse_error("checkpoint: cannot open '" + path + "'");
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == buf_.size(); }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint16_t u16() {
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(u8()) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    double f64() {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(u8()) << (8 * i);
        double v = 0.0;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }

  private:
    void need(std::size_t n) {
        if (pos_ + n > buf_.size())
            throw parse_error("checkpoint: truncated at byte offset " + std::to_string(pos_));
    }

    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<parameter*>& params) {
    byte_writer w(path);
    w.bytes(k_magic, 4);
    w.u8(k_version);
    if (params.size() > 0xffffffffull) throw contract_error("checkpoint: too many parameters");
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const parameter* p : params) {
        if (!p || !p->value.defined()) throw contract_error("checkpoint: undefined parameter");
        if (p->name.size() > 0xffff) throw contract_error("checkpoint: parameter name too long");
        w.u16(static_cast<std::uint16_t>(p->name.size()));
        w.bytes(p->name.data(), p->name.size());
        const auto& shape = p->value.shape();
        if (shape.size() > 0xff) throw contract_error("checkpoint: rank too large");
        w.u8(static_cast<std::uint8_t>(shape.size()));
        for (std::int64_t d : shape) {
            if (d < 0 || d > 0xffffffffll) throw contract_error("checkpoint: dimension out of range");
            w.u32(static_cast<std::uint32_t>(d));
        }
        for (double v : p->value.values()) w.f64(v);
    }
    w.finish(path);
}

std::vector<checkpoint_entry> load_checkpoint(const std::string& path) {
    byte_reader r(path);
    const std::string magic = r.str(4);
    if (std::memcmp(magic.data(), k_magic, 4) != 0)
        throw parse_error("checkpoint: bad magic in '" + path + "'");
    const std::uint8_t version = r.u8();
    if (version != k_version)
        throw parse_error("checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<checkpoint_entry> entries;
    entries.reserve(count);
    for (std::uint32_t e = 0; e < count; ++e) {
        checkpoint_entry entry;
        const std::uint16_t name_len = r.u16();
        entry.name = r.str(name_len);
        const std::uint8_t rank = r.u8();
        shape_t shape(rank);
        std::int64_t numel = 1;
        for (std::uint8_t i = 0; i < rank; ++i) {
            shape[i] = static_cast<std::int64_t>(r.u32());
            numel *= shape[i];
        }
        if (numel < 0 || numel > (1ll << 32))
            throw parse_error("checkpoint: implausible tensor size at byte offset " +
                              std::to_string(r.offset()));
        std::vector<double> values(static_cast<std::size_t>(numel));
        for (auto& v : values) v = r.f64();
        entry.value = tensor::from_values(std::move(shape), std::move(values));
        entries.push_back(std::move(entry));
    }
    if (!r.at_end())
        throw parse_error("checkpoint: trailing bytes after last entry at offset " +
                          std::to_string(r.offset()));
    return entries;
}

void load_checkpoint_into(const std::string& path, const std::vector<parameter*>& params) {
    auto entries = load_checkpoint(path);
    std::map<std::string, const checkpoint_entry*> by_name;
    for (const auto& e : entries) {
        if (!by_name.emplace(e.name, &e).second)
            throw parse_error("checkpoint: duplicate parameter '" + e.name + "'");
    }
    if (entries.size() != params.size())
        throw parse_error("checkpoint: holds " + std::to_string(entries.size()) +
                          " parameters, model has " + std::to_string(params.size()));
    for (parameter* p : params) {
        auto it = by_name.find(p->name);
        if (it == by_name.end())
            throw parse_error("checkpoint: missing parameter '" + p->name + "'");
        const tensor& src = it->second->value;
        if (src.shape() != p->value.shape())
            throw parse_error("checkpoint: parameter '" + p->name + "' has shape " +
                              shape_str(src.shape()) + " but model expects " +
                              shape_str(p->value.shape()));
        p->value.raw_values() = src.values();
    }
}

}  // namespace pointcat
