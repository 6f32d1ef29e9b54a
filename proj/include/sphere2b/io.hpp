#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sphere2b {

// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header);

    CsvBuilder& add(double v);
    CsvBuilder& add(long long v);
    CsvBuilder& add(int v) { return add(static_cast<long long>(v)); }
    CsvBuilder& add(std::size_t v) { return add(static_cast<long long>(v)); }
    CsvBuilder& add(bool v) { return add(static_cast<long long>(v ? 1 : 0)); }
    CsvBuilder& add(std::string_view v);
    CsvBuilder& add(const char* v) { return add(std::string_view(v)); }
    // Throws Inconsistency when the row has the wrong number of cells.
    void end_row();

    std::size_t rows() const { return rows_; }
    const std::string& str() const { return text_; }

private:
    void sep();
    std::size_t columns_ = 0;
    std::size_t cells_ = 0;
    std::size_t rows_ = 0;
    std::string text_;
};

// Writes to a temporary file beside the target and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// 64-bit FNV-1a, used to fingerprint configurations in sidecars.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace sphere2b
