#include <doctest.h>

#include <unistd.h>

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "sphere2b/core.hpp"
#include "sphere2b/io.hpp"
#include "util.hpp"

using namespace sphere2b;
namespace fs = std::filesystem;

TEST_SUITE("io") {
    TEST_CASE("doubles round-trip through their shortest form") {
        CHECK(format_double(0.1) == "0.1");
        CHECK(format_double(1.0) == "1");
        CHECK(format_double(-2.5e-300) == "-2.5e-300");
        CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
        CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
        CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
        std::mt19937_64 g(61);
        std::uniform_real_distribution<double> e(-300, 300);
        for (int k = 0; k < 2000; ++k) {
            const double v = std::pow(10.0, e(g)) * (k % 2 ? -1 : 1);
            const std::string s = format_double(v);
            double back = 0;
            std::from_chars(s.data(), s.data() + s.size(), back);
            CHECK(back == v);
        }
    }

    TEST_CASE("CSV rows are checked and fields quoted") {
        CsvBuilder c({"a", "b", "c"});
        c.add(1).add(0.25).add("plain");
        c.end_row();
        c.add(true).add(std::size_t{7}).add("x, \"y\"");
        c.end_row();
        CHECK(c.rows() == 2);
        CHECK(c.str() == "a,b,c\n1,0.25,plain\n1,7,\"x, \"\"y\"\"\"\n");
        c.add(1.0);
        CHECK_THROWS_AS(c.end_row(), Error);
    }

    TEST_CASE("atomic writes leave only the target") {
        const fs::path dir = fs::temp_directory_path() / ("sphere2b_io_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        const fs::path f = dir / "out.csv";
        atomic_write(f, "first\n");
        atomic_write(f, "second\n");
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == "second\n");
        int entries = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
        CHECK(entries == 1);
        CHECK_THROWS_AS(atomic_write(dir / "missing" / "deeper" / "x.csv", "x"), Error);
        fs::remove_all(dir);
    }

    TEST_CASE("FNV-1a reference vectors") {
        CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
        CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
        CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
    }
}
