#include "cellcast/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cellcast::log {

namespace {
std::atomic<Level> g_level{Level::Info};
std::ostream* g_sink = nullptr;
std::mutex g_mutex;

std::string_view level_name(Level lvl) {
    switch (lvl) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
        case Level::Off: return "off";
    }
    return "info";
}

void append_value(std::string& out, const std::string& value) {
    if (value.find_first_of(" \t\"=") == std::string::npos && !value.empty()) {
        out += value;
        return;
    }
    out += '"';
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
}
}  // namespace

void set_level(Level lvl) { g_level = lvl; }
Level level() { return g_level; }

void set_sink(std::ostream* sink) {
    std::lock_guard lock(g_mutex);
    g_sink = sink;
}

std::string format_line(Level lvl, std::string_view event, std::initializer_list<Field> fields) {
    std::string line = "level=";
    line += level_name(lvl);
    line += " event=";
    line += event;
    for (const auto& f : fields) {
        line += ' ';
        line += f.key;
        line += '=';
        append_value(line, f.value);
    }
    return line;
}

void write(Level lvl, std::string_view event, std::initializer_list<Field> fields) {
    if (lvl < g_level.load()) return;
    const std::string line = format_line(lvl, event, fields);
    std::lock_guard lock(g_mutex);
    std::ostream& out = g_sink ? *g_sink : std::cerr;
    out << line << '\n';
    out.flush();
}

}  // namespace cellcast::log
