#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "test_util.hpp"

using tinycnn::test::TempDir;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::filesystem::path& scratch) {
    const auto log = scratch / "cli_out.txt";
    const std::string cmd = std::string(TINYCNN_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    r.out.assign(std::istreambuf_iterator<char>(in), {});
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, SynthTrainInferEvalExport) {
    TempDir tmp("cli");
    const auto data = tmp.path() / "data";
    const std::string common = " --data '" + data.string() + "' --no-baked";

    auto r = run("synth --per-class 5 --data '" + data.string() + "'", tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;

    r = run("train --epochs 2 --val 1 --input-size 16" + common, tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "Starting fresh training")) << r.out;
    EXPECT_TRUE(contains(r.out, "Epoch 1/2"));
    EXPECT_TRUE(contains(r.out, "Batch 2/2 - Loss: "));
    EXPECT_TRUE(contains(r.out, "--- Training Complete ---"));
    EXPECT_TRUE(contains(r.out, "Validation Accuracy: "));
    const auto bin = data / "header" / "myWeights.bin";
    EXPECT_EQ(std::filesystem::file_size(bin), 4044u);  // 1011 parameters at input 16
    EXPECT_TRUE(std::filesystem::exists(data / "header" / "myWeights.h"));
    EXPECT_TRUE(std::filesystem::exists(data / "header" / "train_report.jsonl"));

    r = run("train --epochs 1 --val 1 --input-size 16" + common, tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "Continuing from saved weights")) << r.out;

    r = run("infer --input-size 16 --image '" + (data / "1Cup" / "img_000.ppm").string() + "'" + common, tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "Pred: "));

    r = run("eval --split all --val 1 --input-size 16" + common, tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "Confusion"));

    const auto h1 = tmp.path() / "a.h";
    const auto h2 = tmp.path() / "b.h";
    ASSERT_EQ(run("export-header --input-size 16 --output '" + h1.string() + "'" + common, tmp.path()).code, 0);
    ASSERT_EQ(run("export-header --input-size 16 --output '" + h2.string() + "'" + common, tmp.path()).code, 0);
    EXPECT_EQ(slurp(h1), slurp(h2));
    EXPECT_EQ(slurp(h1), slurp(data / "header" / "myWeights.h"));
}

TEST(Cli, InspectReportsHeStd) {
    TempDir tmp("cli");
    const auto r = run("inspect --no-baked --data '" + tmp.path().string() + "'", tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "20595 parameters")) << r.out;
    EXPECT_TRUE(contains(r.out, "he-init"));
    EXPECT_TRUE(contains(r.out, "0.272166"));
}

TEST(Cli, GradcheckPasses) {
    TempDir tmp("cli");
    const auto r = run("gradcheck --draws 3", tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "PASS")) << r.out;
}

TEST(Cli, BenchStructure) {
    TempDir tmp("cli");
    const auto r = run("bench --frames 3 --no-baked --data '" + tmp.path().string() + "'", tmp.path());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "Frame 3: "));
    EXPECT_TRUE(contains(r.out, "Frames: 3"));
}

TEST(Cli, ExitCodesByCategory) {
    TempDir tmp("cli");
    EXPECT_EQ(run("train --input-size 63 --data '" + tmp.path().string() + "'", tmp.path()).code, 2);
    EXPECT_EQ(run("train --no-baked --data '" + (tmp.path() / "missing").string() + "'", tmp.path()).code, 3);
    EXPECT_EQ(run("infer --no-baked --image '" + (tmp.path() / "none.ppm").string() + "' --data '" +
                      tmp.path().string() + "'",
                  tmp.path())
                  .code,
              5);
    std::filesystem::create_directories(tmp.path() / "header");
    std::ofstream(tmp.path() / "header" / "myWeights.bin") << "short";
    EXPECT_EQ(run("inspect --data '" + tmp.path().string() + "'", tmp.path()).code, 5);
    EXPECT_EQ(run("train --bogus-flag", tmp.path()).code, 2);
}
