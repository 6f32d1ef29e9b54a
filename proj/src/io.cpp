#include "sphere2b/io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "sphere2b/core.hpp"

namespace sphere2b {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw Error(ErrorKind::Domain, "CSV header must not be empty");
    for (const auto& h : header) add(std::string_view(h));
    cells_ = columns_;
    end_row();
    rows_ = 0;
}

void CsvBuilder::sep() {
    if (cells_ > 0) text_ += ',';
    ++cells_;
}

CsvBuilder& CsvBuilder::add(double v) {
    sep();
    text_ += format_double(v);
    return *this;
}

CsvBuilder& CsvBuilder::add(long long v) {
    sep();
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    text_.append(buf, res.ptr);
    return *this;
}

CsvBuilder& CsvBuilder::add(std::string_view v) {
    sep();
    if (v.find_first_of(",\"\n") == std::string_view::npos) {
        text_ += v;
        return *this;
    }
    text_ += '"';
    for (char c : v) {
        if (c == '"') text_ += '"';
        text_ += c;
    }
    text_ += '"';
    return *this;
}

void CsvBuilder::end_row() {
    if (cells_ != columns_)
        throw Error(ErrorKind::Inconsistency,
                    "CSV row has " + std::to_string(cells_) + " cells, header has " + std::to_string(columns_));
    text_ += '\n';
    cells_ = 0;
    ++rows_;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot rename into " + path.string());
    }
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

}  // namespace sphere2b
