#include "wsi/model_file.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "text_util.hpp"
#include "wsi/errors.hpp"

namespace wsi {

namespace {

enum class DType : std::uint8_t { f32 = 0, i8 = 1 };

class Writer {
public:
    explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

    void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u32(bits);
    }
    std::size_t size() const noexcept { return out_.size(); }
    std::string take() { return std::move(out_); }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::string_view take(std::size_t n, const char* what) {
        if (n > data_.size() - pos_) {
            throw TruncatedError(std::string("file ends inside ") + what + " at byte " + std::to_string(pos_));
        }
        const std::string_view out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint64_t le(int n, const char* what) {
        const std::string_view b = take(static_cast<std::size_t>(n), what);
        std::uint64_t v = 0;
        for (int i = n - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
        return v;
    }
    std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(le(1, what)); }
    std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(le(2, what)); }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
    std::uint64_t u64(const char* what) { return le(8, what); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

float f32_at(std::string_view b, std::size_t offset) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(b[offset + static_cast<std::size_t>(i)]);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

struct EntryLayout {
    std::string name;
    DType dtype;
    Shape shape;
    std::size_t length;
};

std::size_t payload_length(DType dtype, const Shape& shape) {
    const std::size_t n = shape_elements(shape);
    return dtype == DType::f32 ? 4 * n : n + 4 * shape[0];
}

std::vector<EntryLayout> layout_for(const ModelConfig& config, const QuantPolicy& applied) {
    std::vector<EntryLayout> entries;
    for (const auto& spec : tensor_specs(config)) {
        const DType dtype = spec.matrix && policy_covers(applied, spec.component) ? DType::i8 : DType::f32;
        entries.push_back({spec.name, dtype, spec.shape, payload_length(dtype, spec.shape)});
    }
    return entries;
}

std::size_t fixed_prefix(std::size_t header_len) { return 4 + 2 + 4 + header_len + 4; }

std::size_t directory_entry_size(const EntryLayout& e) { return 2 + e.name.size() + 1 + 1 + 4 * e.shape.size() + 8 + 8; }

std::string join_sizes(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

std::string model_header(const ModelConfig& config, const QuantPolicy& applied) {
    return "format=wsi-model\n" + config_to_text(config) + policy_to_text(applied) +
           "tied_layer_map=" + join_sizes(make_tied_layer_map(config.num_layers, config.weight_share_group)) + "\n";
}

std::size_t encoded_size(const ModelConfig& config, const QuantPolicy& applied) {
    const auto entries = layout_for(config, applied);
    std::size_t total = fixed_prefix(model_header(config, applied).size());
    for (const auto& e : entries) total += directory_entry_size(e) + e.length;
    return total;
}

std::string encode_model(const Model& model) {
    const std::string header = model_header(model.config(), model.quant_policy());
    const auto entries = layout_for(model.config(), model.quant_policy());
    std::size_t offset = fixed_prefix(header.size());
    for (const auto& e : entries) offset += directory_entry_size(e);

    Writer w(encoded_size(model.config(), model.quant_policy()));
    w.bytes(kModelMagic, 4);
    w.u16(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.bytes(header.data(), header.size());
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.u16(static_cast<std::uint16_t>(e.name.size()));
        w.bytes(e.name.data(), e.name.size());
        w.u8(static_cast<std::uint8_t>(e.dtype));
        w.u8(static_cast<std::uint8_t>(e.shape.size()));
        for (std::size_t d : e.shape) w.u32(static_cast<std::uint32_t>(d));
        w.u64(offset);
        w.u64(e.length);
        offset += e.length;
    }
    for (const auto& e : entries) {
        const Param& p = model.param(e.name);
        if (const auto* t = std::get_if<Tensor>(&p)) {
            for (float v : t->data()) w.f32(v);
        } else {
            const auto& q = std::get<QuantizedTensor>(p);
            for (float s : q.scales()) w.f32(s);
            w.bytes(q.values().data(), q.values().size());
        }
    }
    return w.take();
}

namespace {

struct DecodedHeader {
    ModelConfig config;
    QuantPolicy policy = QuantPolicy::none();
};

DecodedHeader decode_header(std::string_view header) {
    std::string config_text;
    DecodedHeader out;
    std::string tied_map;
    bool saw_format = false;
    try {
        for (const auto& [key, value] : text::parse_key_values(header)) {
            if (key == "format") {
                if (value != "wsi-model") throw StructureError("header format is '" + value + "'");
                saw_format = true;
            } else if (key == "quantize_transformer") {
                out.policy.quantize_transformer = text::to_bool(value, key);
            } else if (key == "quantize_classifier") {
                out.policy.quantize_classifier = text::to_bool(value, key);
            } else if (key == "quantize_frontend") {
                out.policy.quantize_frontend = text::to_bool(value, key);
            } else if (key == "quantize_pos_conv") {
                out.policy.quantize_pos_conv = text::to_bool(value, key);
            } else if (key == "tied_layer_map") {
                tied_map = value;
            } else {
                config_text += key + "=" + value + "\n";
            }
        }
        out.config = config_from_text(config_text);
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw InconsistentModelError(std::string("model header: ") + e.what());
    }
    if (!saw_format) throw StructureError("model header lacks the format key");
    const std::string expected =
        join_sizes(make_tied_layer_map(out.config.num_layers, out.config.weight_share_group));
    if (tied_map != expected) {
        throw InconsistentModelError("tied_layer_map '" + tied_map + "' disagrees with weight_share_group " +
                                     std::to_string(out.config.weight_share_group));
    }
    return out;
}

}  // namespace

Model decode_model(std::string_view bytes) {
    Reader r(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
        throw BadMagicError("not a WSI1 model file");
    }
    r.take(4, "magic");
    const std::uint16_t version = r.u16("format version");
    if (version != kModelFormatVersion) {
        throw VersionMismatchError("model format version " + std::to_string(version) + ", expected " +
                                   std::to_string(kModelFormatVersion));
    }
    const std::uint32_t header_len = r.u32("header length");
    const DecodedHeader header = decode_header(r.take(header_len, "header"));
    const std::uint32_t count = r.u32("tensor count");

    struct Entry {
        std::string name;
        DType dtype;
        Shape shape;
        std::uint64_t offset;
        std::uint64_t length;
    };
    std::vector<Entry> entries;
    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        Entry e;
        const std::uint16_t name_len = r.u16("directory");
        e.name = std::string(r.take(name_len, "directory"));
        const std::uint8_t dtype = r.u8("directory");
        if (dtype > 1) throw StructureError("tensor '" + e.name + "' has unknown dtype " + std::to_string(dtype));
        e.dtype = static_cast<DType>(dtype);
        const std::uint8_t rank = r.u8("directory");
        if (rank == 0 || (e.dtype == DType::i8 && rank < 2)) {
            throw StructureError("tensor '" + e.name + "' has invalid rank " + std::to_string(rank));
        }
        for (std::uint8_t d = 0; d < rank; ++d) {
            const std::uint32_t dim = r.u32("directory");
            if (dim == 0) throw StructureError("tensor '" + e.name + "' has a zero dimension");
            e.shape.push_back(dim);
        }
        e.offset = r.u64("directory");
        e.length = r.u64("directory");
        if (!seen.insert(e.name).second) throw StructureError("duplicate tensor name '" + e.name + "'");
        if (!entries.empty() && entries.back().name >= e.name) {
            throw StructureError("tensor directory is not sorted at '" + e.name + "'");
        }
        if (e.length != payload_length(e.dtype, e.shape)) {
            throw StructureError("tensor '" + e.name + "' length " + std::to_string(e.length) +
                                 " does not match its shape " + shape_to_string(e.shape));
        }
        entries.push_back(std::move(e));
    }

    std::uint64_t expected_offset = r.pos();
    for (const auto& e : entries) {
        if (e.offset != expected_offset) {
            throw StructureError("tensor '" + e.name + "' offset " + std::to_string(e.offset) + ", expected " +
                                 std::to_string(expected_offset));
        }
        expected_offset += e.length;
    }
    if (expected_offset > bytes.size()) {
        throw TruncatedError("payload needs " + std::to_string(expected_offset) + " bytes, file has " +
                             std::to_string(bytes.size()));
    }
    if (expected_offset != bytes.size()) {
        throw StructureError(std::to_string(bytes.size() - expected_offset) + " trailing bytes after payload");
    }

    std::map<std::string, Param> tensors;
    try {
        for (const auto& e : entries) {
            const std::size_t n = shape_elements(e.shape);
            if (e.dtype == DType::f32) {
                Tensor t(e.shape);
                for (std::size_t i = 0; i < n; ++i) t[i] = f32_at(bytes, e.offset + 4 * i);
                tensors.emplace(e.name, std::move(t));
            } else {
                std::vector<float> scales(e.shape[0]);
                for (std::size_t c = 0; c < scales.size(); ++c) scales[c] = f32_at(bytes, e.offset + 4 * c);
                const char* codes = bytes.data() + e.offset + 4 * scales.size();
                std::vector<std::int8_t> values(n);
                std::memcpy(values.data(), codes, n);
                tensors.emplace(e.name, QuantizedTensor(e.shape, std::move(values), std::move(scales)));
            }
        }
        return Model(header.config, std::move(tensors), header.policy);
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw InconsistentModelError(e.what());
    }
}

std::size_t save_model(const Model& model, const std::string& path) {
    const std::string bytes = encode_model(model);
    text::write_file(path, bytes);
    return bytes.size();
}

Model load_model(const std::string& path) { return decode_model(text::read_file(path)); }

}  // namespace wsi
