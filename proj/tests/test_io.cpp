#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "modecon/io.hpp"
#include "support/oracles.hpp"

using namespace modecon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("modecon_io_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ModelJson, RoundTripIsBitExact) {
    const TempDir dir("model");
    const Network net = oracle::random_net({5, 7, 3, 2}, 1);
    save_network(net, dir.file("m.json"));
    EXPECT_EQ(load_network(dir.file("m.json")), net);
    EXPECT_EQ(network_from_json(to_json(net)), net);
}

TEST(ModelJson, MalformedInputsRaiseParseErrors) {
    EXPECT_THROW(network_from_json(json::parse(R"({"dims": [2, 2]})")), ParseError);
    EXPECT_THROW(network_from_json(json::parse(R"({"dims": [2, 2, 1], "weights": [[1, 2, 3, 4], ["x"]]})")),
                 ParseError);
    EXPECT_THROW(network_from_json(json::parse(R"({"dims": [2, 2, 1], "weights": [[1, 2, 3, 4]]})")), DimensionError);
    EXPECT_THROW(network_from_json(json::parse(R"({"dims": [2, 2, 1], "weights": [[1, 2, 3], [1, 1]]})")),
                 DimensionError);
    const TempDir dir("bad");
    write_text_file(dir.file("bad.json"), "{not json");
    EXPECT_THROW(load_network(dir.file("bad.json")), ParseError);
    EXPECT_THROW(load_network(dir.file("missing.json")), ParseError);
}

TEST(MaskJson, RoundTrip) {
    const Network net = oracle::random_net({3, 8, 6, 2}, 2);
    const DropoutMask m = sample_mask(net, 0.5, 3);
    EXPECT_EQ(mask_from_json(to_json(m)), m);
    EXPECT_THROW(mask_from_json(json::parse(R"({"keep": [[0]]})")), ParseError);
}

TEST(PathJson, ListsLabelsAndPoints) {
    const Network net = oracle::random_net({3, 6, 6, 2}, 4);
    const json j = to_json(lemma31_path(net, sample_mask(net, 0.5, 5)));
    EXPECT_EQ(j["segments"], 6);
    EXPECT_EQ(j["points"].size(), 7u);
    EXPECT_EQ(network_from_json(j["points"][0]), net);
}

TEST(DatasetCsv, RegressionRoundTrip) {
    const TempDir dir("csvreg");
    const LabeledDataset d = make_regression(oracle::random_inputs(10, 3, 1), oracle::random_inputs(10, 2, 2));
    write_text_file(dir.file("d.csv"), dataset_csv(d));
    const LabeledDataset back = read_dataset_csv(dir.file("d.csv"));
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.targets, d.targets);
    EXPECT_FALSE(back.has_labels());
}

TEST(DatasetCsv, ClassificationRoundTrip) {
    const TempDir dir("csvcls");
    const LabeledDataset d = make_classification(oracle::random_inputs(9, 2, 3), {0, 1, 2, 0, 1, 2, 0, 1, 2}, 3);
    const std::string text = dataset_csv(d);
    EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,label");
    write_text_file(dir.file("d.csv"), text);
    const LabeledDataset back = read_dataset_csv(dir.file("d.csv"));
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_EQ(back.targets, d.targets);
}

TEST(DatasetCsv, RejectsMalformedRows) {
    const TempDir dir("csvbad");
    write_text_file(dir.file("a.csv"), "x1,y1\n1,2\n3\n");
    EXPECT_THROW(read_dataset_csv(dir.file("a.csv")), ParseError);
    write_text_file(dir.file("b.csv"), "x1,y1\n1,abc\n");
    EXPECT_THROW(read_dataset_csv(dir.file("b.csv")), ParseError);
    write_text_file(dir.file("c.csv"), "x1,z\n1,2\n");
    EXPECT_THROW(read_dataset_csv(dir.file("c.csv")), ParseError);
    write_text_file(dir.file("d.csv"), "x1,label\n1,0.5\n");
    EXPECT_THROW(read_dataset_csv(dir.file("d.csv")), ParseError);
}

TEST(ProfileCsv, HeaderAndRows) {
    const Network a = oracle::random_net({2, 4, 1}, 1), b = oracle::random_net({2, 4, 1}, 2);
    const LabeledDataset d = make_regression(oracle::random_inputs(5, 2, 3), oracle::random_inputs(5, 1, 4));
    const std::string csv = profile_csv(eval_path(linear_path(a, b), d, LossKind::squared, 4));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,loss,accuracy");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.back(), ',');
    }
    EXPECT_EQ(rows, 5u);
}

TEST(FormatDouble, RoundTripsAndNamesSpecials) {
    EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_TRUE(number_or_null(std::numeric_limits<double>::infinity()).is_null());
}

TEST(StabilityOutput, WritesReportAndHistograms) {
    const TempDir dir("stab");
    const Network net = oracle::random_net({3, 8, 8, 2}, 5);
    const LabeledDataset d = make_regression(oracle::random_inputs(20, 3, 6), oracle::random_inputs(20, 2, 7));
    StabilityOptions o;
    o.mask_samples = 2;
    o.t_grid = 3;
    const StabilityReport rep = measure_stability(net, d, LossKind::squared, o);
    write_stability(rep, dir.path.string());
    for (const char* f : {"report.json", "layer_cushion_1.csv", "layer_cushion_3.csv", "interlayer_cushion_1_3.csv",
                          "interlayer_cushion_3_3.csv", "minimal_interlayer_cushion_2.csv",
                          "activation_contraction_2.csv", "interlayer_smoothness_2.csv", "interlayer_smoothness_3.csv"})
        EXPECT_TRUE(fs::exists(dir.path / f)) << f;
    EXPECT_EQ(slurp(dir.file("interlayer_cushion_2_2.csv")).substr(0, 6), "value\n");
    const json j = read_json_file(dir.file("report.json"));
    EXPECT_EQ(j["depth"], 3);
    EXPECT_EQ(j["layer_cushion"][0]["used_in_epsilon"], false);
    EXPECT_EQ(j["layer_cushion"][1]["used_in_epsilon"], true);
    for (const auto& row : j["interlayer_cushion"])
        if (row["i"] == row["j"]) EXPECT_EQ(row["min"], 1.0);
    for (const auto& c : j["side_conditions"]) EXPECT_TRUE(c["status"] == "pass" || c["status"] == "warn");
}
