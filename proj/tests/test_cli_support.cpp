#include <gtest/gtest.h>

#include <regex>

#include "milnorflow/cli_support.hpp"
#include "milnorflow/errors.hpp"

using namespace milnorflow;

TEST(ParseGrid, ListsAndRanges) {
    EXPECT_EQ(parse_grid("1,2,3"), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(parse_grid("1:3:0.5"), (std::vector<double>{1, 1.5, 2, 2.5, 3}));
    EXPECT_EQ(parse_grid("0, 0.5:1:0.25 ,2"), (std::vector<double>{0, 0.5, 0.75, 1, 2}));
    EXPECT_EQ(parse_grid("0:0.3:0.1").size(), 4u);
}

TEST(ParseGrid, RejectsMalformed) {
    for (const char* bad : {"", "a", "1,,2", "1:2", "1:2:0", "1:2:-1", "3:1:1", "1:2:3:4", "1e999"})
        EXPECT_THROW(parse_grid(bad), DomainError) << bad;
}

TEST(Format, G17RoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 2.0 * 3.141592653589793, 1e-300, -12345.678}) {
        EXPECT_EQ(std::stod(format_g17(x)), x);
    }
    EXPECT_EQ(format_g17(1.0), "1");
}

TEST(Format, CsvField) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST(Format, SplitAndTimestamp) {
    EXPECT_EQ(split_list("geom, ,bundle,"), (std::vector<std::string>{"geom", "bundle"}));
    EXPECT_TRUE(std::regex_match(utc_timestamp(), std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}
