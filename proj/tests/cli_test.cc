// Copyright 2026 The GHCBC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result RunCli(const std::string& args) {
  const fs::path log = fs::path(::testing::TempDir()) / "ghcbc_cli.log";
  const std::string cmd =
      std::string(GHCBC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  return r;
}

fs::path Fresh(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("ghcbc_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kTiny =
    " --set model.enc_layers=1 --set model.dec_layers=1"
    " --set model.hcbc_layers=1";

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(RunCli("").code, 1);
  EXPECT_EQ(RunCli("frobnicate").code, 1);
  const Result r = RunCli("gen-demos --out " + Fresh("bad").string() +
                       " --set model.nonexistent=3");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("model.nonexistent"), std::string::npos);
}

TEST(CliTest, MissingInputsExitTwoNamingThePath) {
  const Result r = RunCli("train --data /nonexistent/demos --out " +
                       Fresh("missing").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/nonexistent/demos"), std::string::npos);
}

TEST(CliTest, ExpertEvaluationSucceeds) {
  const fs::path out = Fresh("expert");
  const Result r = RunCli("eval --expert --episodes 5 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("success rate 1 over 5"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "eval.json"));
}

TEST(CliTest, GenerateTrainEvaluateReplayPlot) {
  const fs::path data = Fresh("data");
  const fs::path run = Fresh("run");
  const fs::path eval = Fresh("eval");
  const fs::path plots = Fresh("plots");
  ASSERT_EQ(RunCli("gen-demos --out " + data.string() + " --set demos.count=2")
                .code,
            0);
  EXPECT_TRUE(fs::exists(data / "manifest.txt"));

  const Result train =
      RunCli("train --data " + data.string() + " --out " + run.string() + kTiny +
          " --set train.steps=2 --set train.eval_every=2"
          " --set train.eval_episodes=1 --set train.batch_size=2");
  ASSERT_EQ(train.code, 0) << train.output;
  EXPECT_TRUE(fs::exists(run / "config.yaml"));
  EXPECT_TRUE(fs::exists(run / "best.ckpt"));

  const Result ev = RunCli("eval --checkpoint " + (run / "best.ckpt").string() +
                        " --episodes 2 --out " + eval.string());
  ASSERT_EQ(ev.code, 0) << ev.output;
  int traces = 0;
  std::string args;
  for (const auto& e : fs::directory_iterator(eval / "traces")) {
    args += " " + e.path().string();
    ++traces;
  }
  EXPECT_EQ(traces, 2);
  const Result replay =
      RunCli("replay --config " + (run / "config.yaml").string() + args);
  EXPECT_EQ(replay.code, 0) << replay.output;

  // A tampered trace is reported.
  const fs::path first = fs::directory_iterator(eval / "traces")->path();
  std::ofstream(first, std::ios::app)
      << "{\"t\":0,\"raw_action\":[0,0,0,0.5],\"executed_action\":[0,0,0,0.5],"
         "\"gripper\":0,\"transition\":false,\"slot_predictions\":1,"
         "\"history_length\":1,\"pending_predictions\":0}\n";
  EXPECT_EQ(RunCli("replay --config " + (run / "config.yaml").string() + " " +
                first.string())
                .code,
            2);

  const Result plot = RunCli("plot --metrics " + (run / "metrics.jsonl").string() +
                          " --out " + plots.string());
  ASSERT_EQ(plot.code, 0) << plot.output;
  EXPECT_TRUE(fs::exists(plots / "success.svg"));
  EXPECT_TRUE(fs::exists(plots / "l_reconst.svg"));
}

}  // namespace
