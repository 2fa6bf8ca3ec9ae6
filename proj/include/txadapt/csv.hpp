#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace txadapt {

// Round-trip-exact double formatting ("%.17g"); used wherever a value written
// to an artifact file is read back by a later stage.
std::string format_full(double v);

// Compact 9-significant-digit formatting for bulky sample dumps.
std::string format_sig9(double v);

std::string format_fixed(double v, int decimals);

class CsvWriter {
public:
    // Opens for writing (truncates). Lines are LF-terminated UTF-8.
    explicit CsvWriter(const std::filesystem::path& path);

    void raw_line(const std::string& line);

    template <typename... Fields>
    void row(const Fields&... fields) {
        std::string line;
        bool first = true;
        auto append = [&](const std::string& f) {
            if (!first) line += ',';
            line += f;
            first = false;
        };
        (append(to_field(fields)), ...);
        raw_line(line);
    }

    void close();

private:
    static std::string to_field(const std::string& s) { return s; }
    static std::string to_field(const char* s) { return s; }
    static std::string to_field(double v) { return format_full(v); }
    static std::string to_field(int v) { return std::to_string(v); }
    static std::string to_field(long v) { return std::to_string(v); }
    static std::string to_field(long long v) { return std::to_string(v); }
    static std::string to_field(unsigned long v) { return std::to_string(v); }
    static std::string to_field(unsigned long long v) { return std::to_string(v); }

    std::ofstream out_;
    std::filesystem::path path_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a whole CSV file; throws FileFormatError on missing file or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

// Throws FileFormatError unless the table header matches exactly.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

}  // namespace txadapt
