#pragma once

#include <filesystem>
#include <string>

#include "cellcast/ingest.hpp"

namespace cellcast::ingest {

/// CSV with header `cell_id,hour_index,value`, rows ordered by cell then hour.
std::string series_to_csv(const SeriesMap& series);
SeriesMap series_from_csv(std::string_view text);

/// Binary cache: "CCSERIES" magic, u32 version, u64 count, then per series
/// i64 cell_id, i64 start_hour, u64 length and little-endian f64 values.
void write_series_binary(const std::filesystem::path& path, const SeriesMap& series);
SeriesMap read_series_binary(const std::filesystem::path& path);

/// Writes the binary cache when the extension is ".bin", CSV otherwise.
void write_series(const std::filesystem::path& path, const SeriesMap& series);
/// Detects the format from the file's leading bytes.
SeriesMap read_series(const std::filesystem::path& path);

}  // namespace cellcast::ingest
