#pragma once

// Line-delimited `key=value` logging to standard error (or a chosen sink).

#include <concepts>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

#include "cellcast/io.hpp"

namespace cellcast::log {

enum class Level { Debug, Info, Warn, Error, Off };

struct Field {
    std::string key;
    std::string value;

    Field(std::string k, std::string v) : key(std::move(k)), value(std::move(v)) {}
    Field(std::string k, const char* v) : key(std::move(k)), value(v) {}
    Field(std::string k, std::string_view v) : key(std::move(k)), value(v) {}
    template <std::integral T>
    Field(std::string k, T v) : key(std::move(k)), value(std::to_string(v)) {}
    template <std::floating_point T>
    Field(std::string k, T v) : key(std::move(k)), value(io::format_double(static_cast<double>(v))) {}
};

void set_level(Level level);
Level level();
/// nullptr restores std::cerr.
void set_sink(std::ostream* sink);

/// `level=<lvl> event=<event> k1=v1 ...`; values containing spaces are quoted.
std::string format_line(Level lvl, std::string_view event, std::initializer_list<Field> fields);

void write(Level lvl, std::string_view event, std::initializer_list<Field> fields);

inline void debug(std::string_view event, std::initializer_list<Field> fields = {}) { write(Level::Debug, event, fields); }
inline void info(std::string_view event, std::initializer_list<Field> fields = {}) { write(Level::Info, event, fields); }
inline void warn(std::string_view event, std::initializer_list<Field> fields = {}) { write(Level::Warn, event, fields); }
inline void error(std::string_view event, std::initializer_list<Field> fields = {}) { write(Level::Error, event, fields); }

}  // namespace cellcast::log
