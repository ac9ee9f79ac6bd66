#include <gtest/gtest.h>

#include <sstream>

#include <lacunary/io.hpp>

using namespace lacunary;

TEST(Io, ExactDecimalExpansion)
{
    EXPECT_EQ(io::dyadic_decimal(0, 5), "0");
    EXPECT_EQ(io::dyadic_decimal(13, 4), "0.8125");
    EXPECT_EQ(io::dyadic_decimal(1, 1), "0.5");
    EXPECT_EQ(io::dyadic_decimal(4, 4), "0.25");
    EXPECT_EQ(io::dyadic_decimal(1, 10), "0.0009765625");
    EXPECT_EQ(io::dyadic_decimal(pow2(62) - 1, 62).size(), 2U + 62U);
}

TEST(Io, BitStrings)
{
    EXPECT_EQ(io::dyadic_bits(5, 4), "0101");
    EXPECT_EQ(io::dyadic_bits(0, 3), "000");
}

TEST(Io, ParseRational)
{
    EXPECT_EQ(io::parse_rational("1/16"), Rational(1, 16));
    EXPECT_EQ(io::parse_rational("2^-8"), Rational(1, 256));
    EXPECT_EQ(io::parse_rational("0.015625"), Rational(1, 64));
    EXPECT_EQ(io::parse_rational("0.5625"), Rational(9, 16));
    EXPECT_EQ(io::parse_rational("1e-3"), Rational(1, 1000));
    EXPECT_EQ(io::parse_rational(" 3 "), Rational(3));
    EXPECT_EQ(io::parse_rational("-0.25"), Rational(-1, 4));
    EXPECT_EQ(io::parse_rational("010"), Rational(10));
    EXPECT_THROW(io::parse_rational(""), std::invalid_argument);
    EXPECT_THROW(io::parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(io::parse_rational("3^2"), std::invalid_argument);
    EXPECT_THROW(io::parse_rational("abc"), std::invalid_argument);
    EXPECT_THROW(io::parse_rational("1-2"), std::invalid_argument);
}

TEST(Io, CornerFromRationals)
{
    const std::vector<Rational> c{Rational(1, 4), Rational(3, 8), Rational(1)};
    const Corner k = io::corner_from_rationals(c);
    EXPECT_EQ(k.den, 8U);
    EXPECT_EQ(k.num, (std::vector<std::uint64_t>{2, 3, 8}));
    const std::vector<Rational> bad{Rational(1, 3)};
    EXPECT_THROW(io::corner_from_rationals(bad), std::invalid_argument);
}

TEST(Io, PointCsvRoundTrip)
{
    for (auto fmt : {io::CoordFormat::decimal, io::CoordFormat::bits}) {
        const PointSet p = generate_lacunary(17, 3, 25, 40);
        std::stringstream s;
        io::write_points_csv(s, p, fmt);
        const PointSet q = io::read_points_csv(s, fmt);
        ASSERT_EQ(q.dim(), 3U);
        ASSERT_EQ(q.size(), 25U);
        for (std::size_t n = 0; n < 25; ++n)
            for (std::size_t i = 0; i < 3; ++i)
                ASSERT_EQ(q.point(n).coord(i), p.point(n).coord(i));
    }
}

TEST(Io, PointCsvFormat)
{
    std::stringstream s;
    io::write_points_csv(s, PointSet::from_numerators(2, 4, {4, 13, 0, 1}));
    EXPECT_EQ(s.str(), "n,x1,x2\n1,0.25,0.8125\n2,0,0.0625\n");
    std::stringstream b;
    io::write_points_csv(b, PointSet::from_numerators(1, 3, {5}), io::CoordFormat::bits);
    EXPECT_EQ(b.str(), "n,x1\n1,101\n");
}

TEST(Io, ReadPointsRejectsBadInput)
{
    auto read = [](const std::string& text) {
        std::stringstream s(text);
        return io::read_points_csv(s);
    };
    EXPECT_THROW(read(""), std::invalid_argument);
    EXPECT_THROW(read("x,y\n1,2\n"), std::invalid_argument);
    EXPECT_THROW(read("n,x1\n1,0.3\n"), std::invalid_argument);
    EXPECT_THROW(read("n,x1\n1,1\n"), std::invalid_argument);
    EXPECT_THROW(read("n,x1,x2\n1,0.5\n"), std::invalid_argument);
    EXPECT_EQ(read("n,x1\n1,0.5\n2,0.75\n").precision(), 2U);
}

TEST(Io, TrialCsvHeaderAndRow)
{
    TrialRecord r;
    r.trial_index = 3;
    r.seed = 12;
    r.d = 2;
    r.n = 64;
    r.precision = 32;
    r.method = Method::brackets;
    r.dstar_lower = Rational(1, 8);
    r.dstar_upper = Rational(3, 16);
    r.bound_stated = 0.5;
    r.bound_detailed = 0.25;
    r.exceeded = Exceeded::indeterminate;
    std::ostringstream out;
    io::write_trials_csv(out, std::vector<TrialRecord>{r});
    EXPECT_EQ(out.str(),
              "trial,seed,d,N,H,method,dstar_lower,dstar_upper,bound_stated,bound_detailed,exceeded\n"
              "3,12,2,64,32,brackets,0.125,0.1875,0.5,0.25,indeterminate\n");
}

TEST(Io, JsonConfigMirrorsFields)
{
    ExperimentConfig c;
    c.delta = Rational(1, 256);
    const auto j = io::to_json(c);
    EXPECT_EQ(j["d"], 2);
    EXPECT_EQ(j["N"], 1024);
    EXPECT_EQ(j["delta"], "1/256");
    EXPECT_EQ(j["method"], "auto");
    EXPECT_EQ(j["kind"], "lacunary");
}
