#include "txadapt/csv.hpp"

#include <cstdio>
#include <sstream>

#include "txadapt/errors.hpp"

namespace txadapt {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string format_fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw FileFormatError("cannot open for writing: " + path.string());
}

void CsvWriter::raw_line(const std::string& line) {
    out_ << line << '\n';
    if (!out_) throw FileFormatError("write failure: " + path_.string());
}

void CsvWriter::close() {
    if (out_.is_open()) {
        out_.close();
        if (!out_) throw FileFormatError("close failure: " + path_.string());
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot open: " + path.string());
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        fields.push_back(cur);
        return fields;
    };
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (first) {
            table.header = fields;
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw FileFormatError("ragged row in " + path.string() + ": " + line);
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw FileFormatError("empty file: " + path.string());
    return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
    if (table.header != expected) {
        std::string got;
        for (const auto& h : table.header) got += h + ",";
        throw FileFormatError("unexpected header in " + path.string() + ": " + got);
    }
}

double parse_double(const std::string& field, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw FileFormatError("bad numeric field '" + field + "' in " + context);
    }
}

long long parse_int(const std::string& field, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw FileFormatError("bad integer field '" + field + "' in " + context);
    }
}

}  // namespace txadapt
