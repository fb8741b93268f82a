#include "cellcast/nn/serialize.hpp"

#include <array>
#include <fstream>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"

namespace cellcast::nn {

namespace {
constexpr std::array<char, 8> kMagic{'C', 'C', 'W', 'E', 'I', 'G', 'H', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_parameters(std::ostream& out, const ParameterList& params) {
    out.write(kMagic.data(), kMagic.size());
    io::write_le<std::uint32_t>(out, kVersion);
    io::write_le<std::uint64_t>(out, params.size());
    for (const auto* p : params) {
        io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
        for (auto d : p->value.shape()) io::write_le<std::uint64_t>(out, d);
        for (double v : p->value.data()) io::write_le<double>(out, v);
    }
}

void read_parameters(std::istream& in, const ParameterList& params) {
    std::array<char, 8> magic{};
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("not a weight file");
    if (!io::read_le(in, version) || version != kVersion) throw ValidationError("unsupported weight file version");
    if (!io::read_le(in, count)) throw ValidationError("truncated weight file");
    if (count != params.size()) {
        throw ValidationError("weight file has " + std::to_string(count) + " parameters, model has " +
                              std::to_string(params.size()));
    }
    for (auto* p : params) {
        std::uint32_t name_length = 0, rank = 0;
        if (!io::read_le(in, name_length)) throw ValidationError("truncated weight file");
        std::string name(name_length, '\0');
        if (!in.read(name.data(), name_length) || !io::read_le(in, rank)) throw ValidationError("truncated weight file");
        if (name != p->name) throw ValidationError("weight file parameter '" + name + "' where '" + p->name + "' expected");
        Shape shape(rank);
        for (auto& d : shape) {
            std::uint64_t dim = 0;
            if (!io::read_le(in, dim)) throw ValidationError("truncated weight file");
            d = static_cast<std::size_t>(dim);
        }
        if (shape != p->value.shape()) throw ValidationError("shape mismatch for " + name);
        for (double& v : p->value.data()) {
            if (!io::read_le(in, v)) throw ValidationError("truncated weight file");
        }
    }
}

void save_parameters(const std::filesystem::path& path, const ParameterList& params) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_parameters(out, params);
    if (!out) throw ValidationError("write failed for " + path.string());
}

void load_parameters(const std::filesystem::path& path, const ParameterList& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("weight file not found: " + path.string());
    read_parameters(in, params);
}

}  // namespace cellcast::nn
