#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibcwave {

/// Shortest-exact decimal for an IEEE double: 17 significant digits
/// round-trip bit-exactly through text.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Minimal CSV emitter with a fixed header; all numeric cells go through
/// format_double so identical runs produce byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (i) body_ += ',';
            body_ += header_[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<double>& cells) {
        if (cells.size() != header_.size())
            throw std::invalid_argument("CsvWriter: row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += format_double(cells[i]);
        }
        body_ += '\n';
    }

    const std::string& str() const { return body_; }
    void save(const std::string& path) const { write_text_file(path, body_); }

private:
    std::vector<std::string> header_;
    std::string body_;
};

}  // namespace ibcwave
