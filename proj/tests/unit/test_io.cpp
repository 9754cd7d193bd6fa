#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracemb/io.hpp"

using namespace fracemb;
namespace fs = std::filesystem;

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(2.0), "2");
}

TEST(CsvTable, RendersHeaderAndRows) {
    CsvTable t({"t", "x"});
    t.add_row({0.0, 1.0});
    t.add_row({0.25, -0.5});
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.str(), "t,x\n0,1\n0.25,-0.5\n");
    EXPECT_THROW(t.add_row({1.0}), mismatch_error);
}

TEST(CsvTable, TrajectoryTable) {
    Trajectory y(TimeGrid(0.0, 1.0, 2), 2, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    EXPECT_EQ(trajectory_table(y).str(), "t,x0,x1\n0,1,2\n0.5,3,4\n1,5,6\n");
    EXPECT_EQ(trajectory_table(y, "r").str().substr(0, 8), "t,r0,r1\n");
}

TEST(KeyValueFile, KeepsInsertionOrderAndOverwrites) {
    KeyValueFile kv;
    kv.set("b", "first");
    kv.set("a", 0.125);
    kv.set("b", "second");
    EXPECT_EQ(kv.str(), "b=second\na=0.125\n");
    EXPECT_EQ(kv.entries().size(), 2u);
}

TEST(WriteFileAtomic, CreatesParentsAndLeavesNoTemporary) {
    const fs::path dir = fs::temp_directory_path() / "fracemb-io-test";
    fs::remove_all(dir);
    const fs::path target = dir / "nested" / "out.csv";
    write_file_atomic(target, "one\n");
    write_file_atomic(target, "two\n");
    std::ifstream in(target);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "two\n");
    EXPECT_FALSE(fs::exists(dir / "nested" / "out.csv.tmp"));
    EXPECT_EQ(sidecar_path(target).filename(), "out.csv.meta");
    fs::remove_all(dir);
}
