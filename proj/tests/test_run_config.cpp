#include "rbam/commands.hpp"
#include "rbam/errors.hpp"
#include "rbam/run_config.hpp"

#include <gtest/gtest.h>

#include <stdexcept>

using namespace rbam;

TEST(RunConfig, DefaultsAreStandardSetup) {
    const RunConfig cfg = parse_run_config("{}");
    EXPECT_EQ(cfg.mesh.H, 99);
    EXPECT_EQ(cfg.mesh.s_f, 300.0);
    EXPECT_EQ(cfg.time.T, 1.0);
    EXPECT_EQ(cfg.time.L, 20);
    EXPECT_EQ(cfg.time.theta, 0.5);
    EXPECT_EQ(cfg.box.K0, 100.0);
    EXPECT_EQ(cfg.box.r0, 0.05);
    EXPECT_EQ(cfg.box.q0, 0.0015);
    EXPECT_EQ(cfg.box.sigma0, 0.5);
    EXPECT_EQ(cfg.box.eps, 0.1);
    EXPECT_EQ(cfg.sampling.N_train, 16);
    EXPECT_EQ(cfg.sampling.N_test, 10);
    EXPECT_EQ(cfg.sampling.seed, 42u);
    EXPECT_EQ(cfg.rb.NV_tilde, 8);
    EXPECT_EQ(cfg.rb.NW, 8);
    EXPECT_EQ(cfg.resolved_model_path(), "rbam_out/model.json");
}

TEST(RunConfig, PartialOverride) {
    const RunConfig cfg = parse_run_config(R"({"mesh": {"H": 49}, "rb": {"NW": 4}, "io": {"model_path": "m.json"}})");
    EXPECT_EQ(cfg.mesh.H, 49);
    EXPECT_EQ(cfg.mesh.s_f, 300.0);
    EXPECT_EQ(cfg.rb.NW, 4);
    EXPECT_EQ(cfg.rb.NV_tilde, 8);
    EXPECT_EQ(cfg.resolved_model_path(), "m.json");
}

TEST(RunConfig, IntegerAcceptedForRealField) {
    EXPECT_EQ(parse_run_config(R"({"mesh": {"s_f": 400}})").mesh.s_f, 400.0);
}

TEST(RunConfig, RejectsBadDocuments) {
    EXPECT_THROW(parse_run_config("{\"mesh\": {"), ConfigError);
    EXPECT_THROW(parse_run_config("[]"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"meshes": {}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"mesh": {"h": 10}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"mesh": {"H": "99"}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"mesh": {"H": 9.5}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"sampling": {"seed": -1}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"io": {"output_dir": 3}})"), ConfigError);
}

TEST(RunConfig, RejectsOutOfRangeValues) {
    EXPECT_THROW(parse_run_config(R"({"mesh": {"H": 1}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"time": {"theta": 2.0}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"time": {"L": 0}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"box": {"eps": -0.1}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"sampling": {"N_train": 0}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"rb": {"NV_tilde": 0}})"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"io": {"output_dir": ""}})"), ConfigError);
}

TEST(RunConfig, MissingFile) { EXPECT_THROW(load_run_config("/nonexistent/rbam.json"), ConfigError); }

TEST(ParseMu, ValidAndInvalid) {
    EXPECT_EQ(parse_mu("100,0.05,0.0015,0.5"), (ParameterVector{100.0, 0.05, 0.0015, 0.5}));
    EXPECT_EQ(parse_mu("106.882366,0.048470,0.007679,0.418561").K, 106.882366);
    EXPECT_THROW(parse_mu("100,0.05,0.0015"), ConfigError);
    EXPECT_THROW(parse_mu("100,0.05,0.0015,0.5,1"), ConfigError);
    EXPECT_THROW(parse_mu("100,abc,0.0015,0.5"), ConfigError);
    EXPECT_THROW(parse_mu("100,0.05x,0.0015,0.5"), ConfigError);
    EXPECT_THROW(parse_mu("-100,0.05,0.0015,0.5"), ConfigError);
    EXPECT_THROW(parse_mu("100,0.05,0.0015,0"), ConfigError);
}

TEST(ParseBudgets, ValidAndInvalid) {
    const std::vector<BasisBudget> b = parse_budgets("4:4,8:8,16:0");
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0].NV_tilde, 4);
    EXPECT_EQ(b[2].NW, 0);
    EXPECT_THROW(parse_budgets(""), ConfigError);
    EXPECT_THROW(parse_budgets("4"), ConfigError);
    EXPECT_THROW(parse_budgets("4:x"), ConfigError);
    EXPECT_THROW(parse_budgets("0:4"), ConfigError);
    EXPECT_THROW(parse_budgets("4:-1"), ConfigError);
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(MissingArtifact("x")), kExitMissingArtifact);
    EXPECT_EQ(exit_code_for(LoadError("x")), kExitMissingArtifact);
    EXPECT_EQ(exit_code_for(DegenerateInput("x")), kExitSaturation);
    EXPECT_EQ(exit_code_for(BasisSaturation("x", 0)), kExitSaturation);
    EXPECT_EQ(exit_code_for(ConeSaturation("x", 3)), kExitSolver);
    EXPECT_EQ(exit_code_for(SolverDivergence("x", 1.0, 0.0)), kExitSolver);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitFailure);
}
