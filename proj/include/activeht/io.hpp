#pragma once

// Delimited-text helpers: shortest round-trip number formatting, header-based
// column lookup, and atomic output files.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "activeht/common.hpp"

namespace activeht::io {

inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Tab if the header line contains one, otherwise comma.
inline char detect_delimiter(std::string_view header) { return header.find('\t') != std::string_view::npos ? '\t' : ','; }

inline void split(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline bool is_skippable(std::string_view line) {
    return line.empty() || line == "\r" || line.front() == '#';
}

/// Reads the header of a delimited stream (skipping '#' comments) and returns
/// its column names; `line_no` tracks the current 1-based line.
inline std::vector<std::string> read_header(std::istream& in, char& delim, std::size_t& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_skippable(line)) continue;
        delim = detect_delimiter(line);
        std::vector<std::string_view> cells;
        split(line, delim, cells);
        return {cells.begin(), cells.end()};
    }
    throw DataError("input has no header line");
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                                const std::string& source) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(source + ": missing column '" + name + "'");
}

/// Writes to a sibling temporary file and renames it over `path` on commit,
/// so a failed run never leaves a partial output behind.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path path) : path_(std::move(path)) {
        std::random_device rd;
        tmp_ = path_;
        tmp_ += ".tmp" + std::to_string(rd());
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw DataError("cannot open " + path_.string() + " for writing");
    }
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;
    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw DataError("write to " + path_.string() + " failed");
        out_.close();
        std::filesystem::rename(tmp_, path_);
        committed_ = true;
    }

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

} // namespace activeht::io
