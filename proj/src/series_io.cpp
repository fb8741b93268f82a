#include "cellcast/series_io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"

namespace cellcast::ingest {

namespace {
constexpr std::array<char, 8> kMagic{'C', 'C', 'S', 'E', 'R', 'I', 'E', 'S'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string series_to_csv(const SeriesMap& series) {
    std::string out = "cell_id,hour_index,value\n";
    for (const auto& [cell, s] : series) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            out += std::to_string(cell);
            out += ',';
            out += std::to_string(s.start_hour + static_cast<std::int64_t>(i));
            out += ',';
            out += io::format_double(s.values[i]);
            out += '\n';
        }
    }
    return out;
}

SeriesMap series_from_csv(std::string_view text) {
    SeriesMap out;
    std::size_t line_number = 0;
    bool header = true;
    for (auto line : io::split(text, '\n')) {
        ++line_number;
        line = io::trim(line);
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "cell_id,hour_index,value") throw ParseError(line_number, "unexpected series CSV header");
            continue;
        }
        const auto fields = io::split(line, ',');
        if (fields.size() != 3) throw ParseError(line_number, "expected 3 columns");
        const auto cell = io::parse_int(fields[0]);
        const auto hour = io::parse_int(fields[1]);
        const auto value = io::parse_double(fields[2]);
        if (!cell || !hour || !value) throw ParseError(line_number, "malformed series row");
        auto [it, inserted] = out.try_emplace(*cell, HourlyCellSeries{*cell, *hour, {}});
        if (it->second.end_hour() != *hour) {
            throw ParseError(line_number, "series for cell " + std::to_string(*cell) + " is not contiguous");
        }
        it->second.values.push_back(*value);
    }
    if (header) throw ParseError(1, "empty series CSV");
    return out;
}

void write_series_binary(const std::filesystem::path& path, const SeriesMap& series) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(kMagic.data(), kMagic.size());
    io::write_le<std::uint32_t>(out, kVersion);
    io::write_le<std::uint64_t>(out, series.size());
    for (const auto& [cell, s] : series) {
        io::write_le<std::int64_t>(out, cell);
        io::write_le<std::int64_t>(out, s.start_hour);
        io::write_le<std::uint64_t>(out, s.values.size());
        for (double v : s.values) io::write_le<double>(out, v);
    }
    if (!out) throw ValidationError("write failed for " + path.string());
}

SeriesMap read_series_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + path.string());
    std::array<char, 8> magic{};
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("not a series cache: " + path.string());
    if (!io::read_le(in, version) || version != kVersion) throw ValidationError("unsupported series cache version");
    if (!io::read_le(in, count)) throw ValidationError("truncated series cache");
    SeriesMap out;
    for (std::uint64_t i = 0; i < count; ++i) {
        HourlyCellSeries s;
        std::uint64_t length = 0;
        if (!io::read_le(in, s.cell_id) || !io::read_le(in, s.start_hour) || !io::read_le(in, length)) {
            throw ValidationError("truncated series cache");
        }
        s.values.resize(length);
        for (auto& v : s.values) {
            if (!io::read_le(in, v)) throw ValidationError("truncated series cache");
        }
        out.emplace(s.cell_id, std::move(s));
    }
    return out;
}

void write_series(const std::filesystem::path& path, const SeriesMap& series) {
    if (path.extension() == ".bin") {
        write_series_binary(path, series);
    } else {
        io::write_text_file(path, series_to_csv(series));
    }
}

SeriesMap read_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("series file not found: " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kMagic) {
        return read_series_binary(path);
    }
    return series_from_csv(io::read_text_file(path));
}

}  // namespace cellcast::ingest
