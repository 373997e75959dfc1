#include <hornbill/csv.hpp>
#include <hornbill/svg.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace hornbill;

TEST(Csv, HeaderAndRows)
{
    std::ostringstream out;
    csv::Writer w(out, {"a", "b", "c"});
    w.row(1, 0.5, std::string("x,y"));
    w.row(std::size_t{7}, -1e-300, "plain");
    EXPECT_EQ(out.str(), "a,b,c\n1,0.5,\"x,y\"\n7,-1e-300,plain\n");
    EXPECT_THROW(w.row(1, 2), PreconditionError);
}

TEST(Csv, ShortestRoundTrip)
{
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-17, 1e300}) {
        EXPECT_EQ(csv::parse_number(csv::format(v)), v);
    }
    EXPECT_EQ(csv::format(NAN), "nan");
    EXPECT_EQ(csv::format(-INFINITY), "-inf");
    EXPECT_EQ(csv::format("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, ReadNumericTable)
{
    std::istringstream in("x,y\n1,2\n3,nan\n\n5,6\n");
    const auto t = csv::read(in);
    ASSERT_EQ(t.header.size(), 2u);
    EXPECT_EQ(t.columns[t.column("x")], (std::vector<double>{1, 3, 5}));
    EXPECT_TRUE(std::isnan(t.columns[1][1]));
    EXPECT_THROW((void)t.column("z"), DomainError);
    std::istringstream bad("x,y\n1\n");
    EXPECT_THROW((void)csv::read(bad), DomainError);
}

TEST(Svg, SelfContainedLinePlot)
{
    std::ostringstream out;
    svg::PlotSpec spec;
    spec.title = "a < b & c";
    svg::render(out, {1, 2, 3}, {1, 4, 9}, spec);
    const auto s = out.str();
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_NE(s.find("<polyline"), std::string::npos);
    EXPECT_NE(s.find("a &lt; b &amp; c"), std::string::npos);
    EXPECT_EQ(s.find("href"), std::string::npos);
    EXPECT_EQ(s.find("<image"), std::string::npos);
}

TEST(Svg, HistogramAndScatter)
{
    std::ostringstream h;
    svg::PlotSpec spec;
    spec.kind = svg::PlotKind::histogram;
    spec.bins = 5;
    svg::render(h, {1, 2, 2, 3, 3, 3, 4, 5}, {}, spec);
    std::size_t bars = 0;
    for (std::size_t p = h.str().find("fill=\"#1f5fa8\""); p != std::string::npos;
         p = h.str().find("fill=\"#1f5fa8\"", p + 1)) {
        ++bars;
    }
    EXPECT_EQ(bars, 5u);

    std::ostringstream sc;
    spec.kind = svg::PlotKind::scatter;
    spec.log_y = true;
    svg::render(sc, {1, 2, 3}, {10, 0, 1000}, spec);
    std::size_t dots = 0;
    for (std::size_t p = sc.str().find("<circle"); p != std::string::npos; p = sc.str().find("<circle", p + 1)) {
        ++dots;
    }
    EXPECT_EQ(dots, 2u);
    EXPECT_THROW(svg::render(sc, {1, 2}, {1}, svg::PlotSpec{}), DomainError);
}
