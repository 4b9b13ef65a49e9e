#include "support.hpp"

#include "qax/answer_spec.hpp"

#include <nlohmann/json.hpp>

#include <random>
#include <regex>

using namespace qax;

namespace {

AnswerSpec yes_no() { return EnumeratedSpec{{"Yes", "No"}}; }
AnswerSpec binding() { return EnumeratedSpec{{"compound-17", "compound-42", "none"}}; }

// Reference reader for fixed-point text: a grammar check by regex, then the
// value assembled digit by digit.
std::optional<std::int64_t> oracle_fixed_point(const std::string& text, int scale)
{
    static const std::regex grammar(R"(^(-?)([0-9]+)(?:\.([0-9]+))?$)");
    std::smatch m;
    if (!std::regex_match(text, m, grammar))
        return std::nullopt;
    std::string frac = m[3].str();
    if (static_cast<int>(frac.size()) > scale)
        return std::nullopt;
    std::int64_t v = 0;
    for (char c : m[2].str())
        v = v * 10 + (c - '0');
    for (int i = 0; i < scale; ++i)
        v = v * 10 + (i < static_cast<int>(frac.size()) ? frac[static_cast<std::size_t>(i)] - '0' : 0);
    return m[1].str() == "-" ? -v : v;
}

} // namespace

TEST(ValidateSpec, Examples)
{
    EXPECT_TRUE(validate_spec(yes_no()).ok());
    EXPECT_EQ(validate_spec(EnumeratedSpec{{"Yes"}}).violation, ErrorCode::VacuousSpec);
    EXPECT_EQ(validate_spec(IntegerRangeSpec{5, 3}).violation, ErrorCode::EmptyRange);
}

TEST(ValidateSpec, EveryRule)
{
    EXPECT_EQ(validate_spec(EnumeratedSpec{}).violation, ErrorCode::EmptyOptionSet);
    EXPECT_EQ(validate_spec(EnumeratedSpec{{"A", "  "}}).violation, ErrorCode::EmptyOptionSet);
    EXPECT_EQ(validate_spec(EnumeratedSpec{{"Yes", " yes"}}).violation, ErrorCode::DuplicateOption);
    EXPECT_EQ(validate_spec(IntegerRangeSpec{4, 4}).violation, ErrorCode::VacuousSpec);
    EXPECT_TRUE(validate_spec(IntegerRangeSpec{0, 10}).ok());
    EXPECT_EQ(validate_spec(DecimalRangeSpec{100, 0, 2}).violation, ErrorCode::EmptyRange);
    EXPECT_EQ(validate_spec(DecimalRangeSpec{5, 5, 2}).violation, ErrorCode::VacuousSpec);
    EXPECT_TRUE(validate_spec(DecimalRangeSpec{0, 100, 2}).ok());
    EXPECT_TRUE(validate_spec(binding()).ok());
}

TEST(Canonicalize, Examples)
{
    EXPECT_EQ(canonicalize(yes_no(), "  yes ").canonical, "Yes");
    auto seven = canonicalize(IntegerRangeSpec{0, 10}, "7");
    EXPECT_EQ(seven.number, 7);
    EXPECT_EQ(seven.canonical, "7");
    EXPECT_QAX_ERROR(canonicalize(DecimalRangeSpec{0, 100, 2}, "0.375"), ErrorCode::Unparseable);
}

TEST(Canonicalize, DecimalPadding)
{
    AnswerSpec d = DecimalRangeSpec{0, 100, 2};
    EXPECT_EQ(canonicalize(d, "0.5").number, 50);
    EXPECT_EQ(canonicalize(d, "0.5").canonical, "0.50");
    EXPECT_EQ(canonicalize(d, " 1 ").number, 100);
    EXPECT_QAX_ERROR(canonicalize(d, "1."), ErrorCode::Unparseable);
    EXPECT_QAX_ERROR(canonicalize(d, ".5"), ErrorCode::Unparseable);
    EXPECT_QAX_ERROR(canonicalize(d, "1e2"), ErrorCode::Unparseable);
}

TEST(Canonicalize, IntegerRejectsJunk)
{
    AnswerSpec r = IntegerRangeSpec{0, 10};
    EXPECT_QAX_ERROR(canonicalize(r, "7.0"), ErrorCode::Unparseable);
    EXPECT_QAX_ERROR(canonicalize(r, "seven"), ErrorCode::Unparseable);
    EXPECT_QAX_ERROR(canonicalize(r, ""), ErrorCode::Unparseable);
    EXPECT_QAX_ERROR(canonicalize(r, "99999999999999999999999"), ErrorCode::Unparseable);
    EXPECT_EQ(canonicalize(r, "-3").number, -3);
}

TEST(FixedPoint, MatchesBruteForceOracle)
{
    const std::string alphabet = "019.-x";
    std::vector<std::string> corpus{""};
    std::vector<std::string> frontier{""};
    for (int len = 1; len <= 6; ++len) {
        std::vector<std::string> next;
        for (const auto& s : frontier)
            for (char c : alphabet)
                next.push_back(s + c);
        corpus.insert(corpus.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::size_t accepted = 0;
    for (int scale = 0; scale <= 4; ++scale)
        for (const auto& s : corpus) {
            auto got = parse_fixed_point(s, scale);
            ASSERT_EQ(got, oracle_fixed_point(s, scale)) << "'" << s << "' scale " << scale;
            if (got) {
                ++accepted;
                EXPECT_EQ(parse_fixed_point(format_fixed_point(*got, scale), scale), got);
            }
        }
    EXPECT_GT(accepted, 1000u);
}

TEST(Membership, Examples)
{
    EXPECT_EQ(classify(binding(), "compound-17"), Membership::InSet);
    AnswerSpec r = IntegerRangeSpec{0, 10};
    EXPECT_EQ(check_membership(r, AnswerValue{"11", "11", 11}), Membership::OutsideSet);
}

TEST(Membership, IntegerRangeExhaustive)
{
    AnswerSpec r = IntegerRangeSpec{0, 10};
    int inside = 0;
    for (int v = -5; v <= 15; ++v) {
        auto m = classify(r, std::to_string(v));
        EXPECT_EQ(m == Membership::InSet, v >= 0 && v <= 10) << v;
        inside += m == Membership::InSet;
    }
    EXPECT_EQ(inside, 11);
}

TEST(Membership, UnknownEnumeratedOptionIsOutside)
{
    auto v = canonicalize(binding(), "Compound-99");
    EXPECT_EQ(v.canonical, "compound-99");
    EXPECT_EQ(check_membership(binding(), v), Membership::OutsideSet);
    EXPECT_EQ(classify(binding(), "   "), Membership::OutsideSet);
}

TEST(SpecProperty, DeterminismAndTotality)
{
    std::mt19937_64 rng(9);
    const std::vector<AnswerSpec> specs{binding(), yes_no(), IntegerRangeSpec{-20, 20}, DecimalRangeSpec{-150, 250, 2}};
    const std::string alphabet = "0123456789.-+ eEyYsnNocmpound\t";
    for (int i = 0; i < 20000; ++i) {
        std::string raw;
        auto len = rng() % 12;
        for (std::size_t k = 0; k < len; ++k)
            raw += alphabet[rng() % alphabet.size()];
        for (const auto& s : specs) {
            auto first = classify(s, raw);
            EXPECT_TRUE(first == Membership::InSet || first == Membership::OutsideSet);
            EXPECT_EQ(classify(s, raw), first);
        }
    }
}

TEST(SpecProperty, EnumeratedCompleteness)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> options;
        auto n = 2 + rng() % 6;
        for (std::size_t k = 0; k < n; ++k)
            options.push_back("Opt-" + std::to_string(i) + "-" + std::to_string(k) + (rng() % 2 ? "X" : "y"));
        AnswerSpec s = EnumeratedSpec{options};
        ASSERT_TRUE(validate_spec(s).ok());
        for (const auto& o : options) {
            EXPECT_EQ(check_membership(s, canonicalize(s, o)), Membership::InSet);
            EXPECT_EQ(canonicalize(s, "  " + case_fold(o) + " ").canonical, o);
        }
    }
}

TEST(SpecJson, RoundTripsBitExactly)
{
    const std::vector<AnswerSpec> specs{binding(), IntegerRangeSpec{-4, 99}, DecimalRangeSpec{-5, 100, 2},
                                        DecimalRangeSpec{0, 7, 0}};
    for (const auto& s : specs) {
        auto text = spec_to_json(s).dump();
        auto back = spec_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back, s);
        EXPECT_EQ(spec_to_json(back).dump(), text);
    }
    EXPECT_EQ(spec_to_json(DecimalRangeSpec{0, 100, 2}).dump(),
              R"({"hi":"1.00","lo":"0.00","scale":2,"variant":"DecimalRange"})");
}

TEST(SpecJson, MalformedShapes)
{
    using nlohmann::json;
    EXPECT_QAX_ERROR(spec_from_json(json::parse(R"({"variant":"Free"})")), ErrorCode::InvalidSpec);
    EXPECT_QAX_ERROR(spec_from_json(json::parse(R"({"variant":"IntegerRange","lo":"a","hi":3})")),
                     ErrorCode::InvalidSpec);
    EXPECT_QAX_ERROR(spec_from_json(json::parse(R"({"variant":"DecimalRange","lo":"0.001","hi":"1","scale":2})")),
                     ErrorCode::InvalidSpec);
    EXPECT_QAX_ERROR(spec_from_json(json::parse("[]")), ErrorCode::InvalidSpec);
}
