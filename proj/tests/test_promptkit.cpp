#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "metaprobe/fixtures.hpp"
#include "metaprobe/promptkit.hpp"

using namespace metaprobe;

namespace {

std::string golden(const std::string& name) {
    std::ifstream in(std::string(METAPROBE_SOURCE_DIR) + "/goldens/" + name);
    EXPECT_TRUE(in) << name;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const LabelSet kEmpo15573({"Animal (saline)", "Plant (saline)", "Solid (non-saline)", "Aqueous (saline)"});

} // namespace

TEST(Golden, Study15573ZeroShot) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-15573"));
    auto p = render_zero_shot_classification(masked, "empo_3", kEmpo15573);
    EXPECT_EQ(normalize_prompt_text(p.text), normalize_prompt_text(golden("study-15573.classify-zs.txt")));
    EXPECT_EQ(p.n_expected, 27u);
    EXPECT_EQ(p.kind, TaskKind::classify_zs);
}

TEST(Golden, Study1728To15573FewShot) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-15573"));
    auto p = render_few_shot_classification(load_study_fixture("study-1728"), masked, "empo_3", kEmpo15573);
    EXPECT_EQ(normalize_prompt_text(p.text),
              normalize_prompt_text(golden("study-1728_to_study-15573.classify-fs.txt")));
    EXPECT_TRUE(p.diagnostics.empty());
}

TEST(Golden, Huntington2005ZeroShot) {
    auto p = render_binary_contamination(load_beach_fixture("huntington-2005"));
    EXPECT_EQ(normalize_prompt_text(p.text), normalize_prompt_text(golden("huntington-2005.binary-zs.txt")));
    EXPECT_EQ(p.n_expected, 56u);
}

TEST(Golden, Huntington2006To2005FewShot) {
    auto p = render_binary_contamination(load_beach_fixture("huntington-2005"), load_beach_fixture("huntington-2006"));
    EXPECT_EQ(normalize_prompt_text(p.text),
              normalize_prompt_text(golden("huntington-2006_to_huntington-2005.binary-fs.txt")));
    EXPECT_EQ(p.kind, TaskKind::binary_fs);
}

TEST(Golden, ListInstructionIsVerbatim) {
    auto p = render_binary_contamination(load_beach_fixture("huntington-2005"));
    EXPECT_NE(p.text.find("\nPlease show the result in Python list format.\n"), std::string::npos);
}

TEST(Normalize, Rules) {
    EXPECT_EQ(normalize_prompt_text("\n\na  \n\n\n\nb\t\n\n"), "a\n\nb\n");
    EXPECT_EQ(normalize_prompt_text(""), "");
    EXPECT_EQ(normalize_prompt_text(normalize_prompt_text("x \n\n y")), normalize_prompt_text("x \n\n y"));
}

TEST(LabelSet, Validation) {
    EXPECT_THROW(LabelSet(std::vector<std::string>{}), ConfigError);
    EXPECT_THROW(LabelSet({"a", "a"}), ConfigError);
    EXPECT_THROW(LabelSet({"a", "  "}), ConfigError);
    LabelSet l({"b", "a"});
    EXPECT_EQ(l[0], "b");
    EXPECT_TRUE(l.contains("a"));
    EXPECT_FALSE(l.contains("c"));
}

TEST(ZeroShot, LabelOrderIsPrinted) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-1728"));
    auto p = render_zero_shot_classification(masked, "empo_3", LabelSet({"B", "A", "C"}));
    EXPECT_EQ(p.text.substr(0, p.text.find("\n\n")),
              "Could you predict the \"empo_3\" values below(which is now in '?') with B or\nA or C ?");
}

TEST(ZeroShot, SingleLabel) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-1728"));
    auto p = render_zero_shot_classification(masked, "empo_3", LabelSet({"Only"}));
    EXPECT_EQ(p.text.substr(0, p.text.find('\n')), "Could you predict the \"empo_3\" values below(which is now in '?') with Only ?");
}

TEST(ZeroShot, QueryRowsAllMasked) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-1728"));
    auto p = render_zero_shot_classification(masked, "empo_3", kEmpo15573);
    for (const auto& t : truth) EXPECT_EQ(p.text.find(" " + t + "\n"), std::string::npos) << t;
}

TEST(ZeroShot, WrongTargetIsError) {
    auto [masked, truth] = mask_labels(load_study_fixture("study-1728"));
    EXPECT_THROW(render_zero_shot_classification(masked, "sample_type", kEmpo15573), ConfigError);
}

TEST(FewShot, SameStudyEmitsDiagnostic) {
    auto t = load_study_fixture("study-1728");
    auto [masked, truth] = mask_labels(t);
    auto p = render_few_shot_classification(t, masked, "empo_3", kEmpo15573);
    ASSERT_EQ(p.diagnostics.size(), 1u);
}

TEST(FewShot, SupportShowsLabelsQueryDoesNot) {
    auto support = load_study_fixture("study-1728");
    auto [masked, truth] = mask_labels(load_study_fixture("study-15573"));
    auto p = render_few_shot_classification(support, masked, "empo_3", kEmpo15573);
    EXPECT_NE(p.text.find("Aqueous (non-saline)"), std::string::npos);
    EXPECT_TRUE(p.text.starts_with("Based on this study:\n\n"));
}

TEST(FewShot, MaskedSupportIsError) {
    auto [sm, st] = mask_labels(load_study_fixture("study-1728"));
    auto [masked, truth] = mask_labels(load_study_fixture("study-15573"));
    EXPECT_THROW(render_few_shot_classification(sm.table(), masked, "empo_3", kEmpo15573), ConfigError);
}

TEST(Binary, LabeledQueryIsError) {
    EXPECT_THROW(render_binary_contamination(load_beach_fixture("huntington-2006")), ConfigError);
}

TEST(Binary, UnlabeledSupportIsError) {
    EXPECT_THROW(render_binary_contamination(load_beach_fixture("huntington-2005"), load_beach_fixture("huntington-2005")),
                 ConfigError);
}

TEST(Regression, EmptyQueryIsError) {
    EXPECT_THROW(render_regression(BeachSeries({}, false, false)), ConfigError);
}

TEST(Regression, StatesRowCountAndHidesCfu) {
    auto s = parse_beach_table("Date Lake_Temp_C Lake_Turb_NTRU WaveHt_Ft LL_PreDay AirportRain48W_in EcoliAve_CFU\n"
                               "2006-06-01 20.0 3.9 0.50 0.040 0.7 812.5\n"
                               "2006-06-02 21.5 4.0 1.00 -0.010 0.0 300.0\n");
    auto p = render_regression(s);
    EXPECT_NE(p.text.find("following 2 rows"), std::string::npos);
    EXPECT_EQ(p.text.find("812.5"), std::string::npos);
    EXPECT_EQ(p.kind, TaskKind::regress_zs);
    auto fs = render_regression(s.without_labels(), s);
    EXPECT_NE(fs.text.find("812.5"), std::string::npos);
    EXPECT_THROW(render_regression(s, s.without_labels()), ConfigError);
}

TEST(BeachTable, ColumnsRightAligned) {
    auto s = parse_beach_table("Date Lake_Temp_C Lake_Turb_NTRU WaveHt_Ft LL_PreDay AirportRain48W_in\n"
                               "2006-06-01 20.0 3.9 0.50 0.040 0.7\n");
    auto out = format_beach(s, {false, false, 2});
    EXPECT_EQ(out,
              "  Date  Lake_Temp_C  Lake_Turb_NTRU  WaveHt_Ft  LL_PreDay  AirportRain48W_in\n"
              "2006-06-01         20.0             3.9       0.50      0.040                0.7\n");
}
