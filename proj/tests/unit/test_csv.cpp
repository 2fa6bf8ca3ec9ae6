#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "txadapt/csv.hpp"
#include "txadapt/errors.hpp"

using namespace txadapt;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("full-precision formatting round-trips doubles exactly") {
    for (double v : {1.0 / 3.0, 1e-300, 0.1, -58.203443750759, 3.1622776601683794e-15, 0.0}) {
        std::string s = format_full(v);
        CHECK(parse_double(s, "t") == v);
    }
}

TEST_CASE("nine-digit formatting stays within relative 1e-8") {
    for (double v : {1.0 / 3.0, 123456.789, 2.5e11}) {
        double back = parse_double(format_sig9(v), "t");
        CHECK(back == doctest::Approx(v).epsilon(1e-8));
    }
}

TEST_CASE("fixed formatting pins the decimal count") {
    CHECK(format_fixed(0.98765, 4) == "0.9877");
    CHECK(format_fixed(2.0, 2) == "2.00");
}

TEST_CASE("written rows read back field-for-field") {
    auto path = temp_path("txadapt_test_csv_rt.csv");
    {
        CsvWriter out(path);
        out.raw_line("a,b,c");
        out.row("x", 0.5, 7);
        out.row("y", -1.25, -2);
        out.close();
    }
    CsvTable t = read_csv(path);
    require_header(t, {"a", "b", "c"}, path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "x");
    CHECK(parse_double(t.rows[0][1], "t") == 0.5);
    CHECK(parse_int(t.rows[1][2], "t") == -2);
    std::filesystem::remove(path);
}

TEST_CASE("ragged rows and wrong headers are rejected") {
    auto path = temp_path("txadapt_test_csv_bad.csv");
    write_text(path, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv(path), FileFormatError);

    write_text(path, "a,b\n1,2\n");
    CsvTable t = read_csv(path);
    CHECK_THROWS_AS(require_header(t, {"a", "c"}, path), FileFormatError);
    CHECK_THROWS_AS(require_header(t, {"a", "b", "c"}, path), FileFormatError);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_csv(temp_path("txadapt_no_such_file.csv")), FileFormatError);
}

TEST_CASE("windows line endings and blank lines are tolerated") {
    auto path = temp_path("txadapt_test_csv_crlf.csv");
    write_text(path, "a,b\r\n1,2\r\n\r\n3,4\r\n");
    CsvTable t = read_csv(path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1] == "4");
    std::filesystem::remove(path);
}

TEST_CASE("numeric fields parse strictly") {
    CHECK(parse_double("1e3", "t") == 1000.0);
    CHECK(parse_int("42", "t") == 42);
    CHECK_THROWS_AS(parse_double("1.5x", "t"), FileFormatError);
    CHECK_THROWS_AS(parse_double("", "t"), FileFormatError);
    CHECK_THROWS_AS(parse_int("3.5", "t"), FileFormatError);
    CHECK_THROWS_AS(parse_int("abc", "t"), FileFormatError);
}

TEST_CASE("writers create missing parent directories") {
    auto dir = temp_path("txadapt_test_csv_nested");
    std::filesystem::remove_all(dir);
    auto path = dir / "deep" / "file.csv";
    {
        CsvWriter out(path);
        out.raw_line("h");
        out.row(1);
        out.close();
    }
    CHECK(std::filesystem::exists(path));
    std::filesystem::remove_all(dir);
}
